//! Inequalities of two distance functions on the triangle, and whether one
//! makes the other redundant.
//!
//! ```bash
//! cargo run --example triangle_inequalities
//! ```

use routecap::elimination::eliminates;
use routecap::japanese::{make_inequality, DistanceFunction};
use routecap::network::triangle_problem;
use routecap::{Rational, Result};

fn main() -> Result<()> {
    let problem = triangle_problem(Rational::one())?;
    let g = DistanceFunction::from_u64(&[2, 1, 3]);
    let f = DistanceFunction::from_u64(&[1, 0, 1]);

    for h in [&g, &f] {
        let ineq = make_inequality(&problem, h)?;
        let terms: Vec<String> = problem
            .sessions
            .iter()
            .zip(&ineq.coefficients)
            .map(|(s, c)| format!("{c} R[{}]", s.id))
            .collect();
        println!("{h}: {} <= {}", terms.join(" + "), ineq.rhs);
    }

    println!("{f} eliminates {g}: {}", eliminates(&problem, &f, &g)?);
    println!("{g} eliminates {f}: {}", eliminates(&problem, &g, &f)?);
    Ok(())
}
