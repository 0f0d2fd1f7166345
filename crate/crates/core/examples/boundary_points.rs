//! Boundary rate tuples found by maximizing along random directions, checked
//! against every 0/1/2-valued distance function two ways: by evaluating the
//! hyperplane, and by searching for a flow that uses only shortest subtrees
//! and saturates every positive-length edge.
//!
//! ```bash
//! cargo run --example boundary_points
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routecap::elimination::bounded_candidates;
use routecap::feasibility::{boundary_conditions, max_along, on_hyperplane, RateTuple};
use routecap::network::triangle_problem;
use routecap::{Rational, Result};

fn main() -> Result<()> {
    let problem = triangle_problem(Rational::one())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let direction: Vec<Rational> = (0..problem.session_count())
            .map(|_| Rational::new(rng.gen_range(0..4i64), rng.gen_range(1..4i64)).unwrap())
            .collect();
        if direction.iter().all(|d| d.is_zero()) {
            continue;
        }
        let (t, _) = max_along(&problem, &direction)?;
        let point = RateTuple::new(&problem, direction.iter().map(|d| d * &t).collect())?;
        let mut tight = Vec::new();
        for f in bounded_candidates(problem.edge_count(), 2, 1000)? {
            let hyper = on_hyperplane(&problem, &point, &f)?;
            let flows = boundary_conditions(&problem, &point, &f)?.is_some();
            assert_eq!(hyper, flows, "{f}");
            if hyper && !f.values().iter().all(|v| v.bits() == 0) {
                tight.push(f.to_string());
            }
        }
        println!("t = {t}: tight for {}", tight.join(" "));
    }
    Ok(())
}
