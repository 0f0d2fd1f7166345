//! With a single unicast session, the largest feasible rate is the minimum
//! edge cut between source and destination.
//!
//! ```bash
//! cargo run --example min_cut
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routecap::feasibility::max_along;
use routecap::network::{Network, Problem, Session};
use routecap::{Rational, Result};

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 5;
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.gen_bool(0.6) {
                edges.push((a, b, Rational::from(rng.gen_range(1..5i64))));
            }
        }
    }
    let net = Network::new(false, n, edges)?;
    for e in &net.edges {
        println!("edge {}: {} - {} capacity {}", e.id, e.tail, e.head, e.capacity);
    }
    let source = 1;
    let Some(&dest) = net.reachable_from(source).iter().find(|&&v| v != source) else {
        println!("vertex 1 is isolated");
        return Ok(());
    };
    let problem = Problem::new(net, vec![Session::new(source, [dest])])?;
    let (rate, w) = max_along(&problem, &[Rational::one()])?;
    println!("max rate {source} -> {dest}: {rate} over {} paths", w.to_records(&problem).len());
    Ok(())
}
