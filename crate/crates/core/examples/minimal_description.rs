//! Minimal descriptions over distance functions with small entries, with the
//! candidates each survivor accounts for.
//!
//! ```bash
//! cargo run --example minimal_description
//! ```

use routecap::elimination::{minimal_description, DEFAULT_ENUMERATION_CAP};
use routecap::network::{ring_problem, triangle_problem, SessionPolicy};
use routecap::{Rational, Result};

fn main() -> Result<()> {
    let triangle = triangle_problem(Rational::one())?;
    let desc = minimal_description(&triangle, 2, DEFAULT_ENUMERATION_CAP)?;
    println!("triangle, entries <= 2: {} inequalities", desc.len());
    for s in &desc.survivors {
        let eliminated: Vec<String> = s.eliminated.iter().map(|f| f.to_string()).collect();
        println!("  {}  rhs {}  eliminates [{}]", s.inequality.distance, s.inequality.rhs, eliminated.join(" "));
    }

    let ring = ring_problem(4, SessionPolicy::UnicastBroadcast, Rational::one())?;
    for max in [1, 2] {
        let desc = minimal_description(&ring, max, DEFAULT_ENUMERATION_CAP)?;
        let kept: Vec<String> = desc.inequalities().map(|i| i.distance.to_string()).collect();
        println!("4-ring, entries <= {max}: {} inequalities: {}", desc.len(), kept.join(" "));
    }
    Ok(())
}
