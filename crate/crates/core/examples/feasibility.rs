//! Feasibility of rate tuples on the triangle: a flow witness when the rates
//! are achievable, a dual certificate when they are not, and the largest
//! feasible multiple of a direction.
//!
//! ```bash
//! cargo run --example feasibility
//! ```

use routecap::feasibility::{is_feasible, max_along, Feasibility, RateTuple};
use routecap::network::triangle_problem;
use routecap::{Rational, Result};

fn main() -> Result<()> {
    let problem = triangle_problem(Rational::one())?;
    let one = Rational::one();

    let cycle = RateTuple::from_pairs(
        &problem,
        [("1->2", one.clone()), ("2->3", one.clone()), ("3->1", one.clone())],
    )?;
    if let Feasibility::Feasible(w) = is_feasible(&problem, &cycle)? {
        println!("clockwise unicasts at rate 1 are feasible:");
        for rec in w.to_records(&problem) {
            println!("  {rec}");
        }
    }

    let broadcast = RateTuple::from_pairs(&problem, [("1->{2,3}", Rational::from(2))])?;
    if let Feasibility::Infeasible(cert) = is_feasible(&problem, &broadcast)? {
        println!("broadcast at rate 2 is infeasible, certificate checks: {}", cert.verify(&problem, &broadcast));
        println!("  {}", cert.to_record(&problem));
    }

    let mut direction = vec![Rational::zero(); problem.session_count()];
    direction[problem.session_index("1->{2,3}").unwrap()] = Rational::one();
    direction[problem.session_index("2->1").unwrap()] = Rational::new(1, 2)?;
    let (t, _) = max_along(&problem, &direction)?;
    println!("largest feasible multiple of the direction: {t}");
    Ok(())
}
