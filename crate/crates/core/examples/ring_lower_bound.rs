//! The ring distance function that only multiples of itself can eliminate,
//! checked by exhaustive search below its maximum entry, and its extension to
//! a graph through a longest cycle.
//!
//! ```bash
//! cargo run --release --example ring_lower_bound
//! ```

use routecap::network::{Network, SessionPolicy};
use routecap::ring_lab::{embed_on_cycle, ring_beta, ring_lower_bound_distance, satisfies_forced_relations, verify_ring_lower_bound};
use routecap::{Rational, Result};

fn main() -> Result<()> {
    for n in [5, 8, 11] {
        let g = ring_lower_bound_distance(n)?;
        println!("|E| = {n}: g = {g}, beta = {}, relations hold: {}", ring_beta(n), satisfies_forced_relations(&g, n));
    }
    for (n, cap) in [(5, 1), (5, 2), (8, 3)] {
        let r = verify_ring_lower_bound(n, cap, SessionPolicy::AllMulticast, 1 << 24)?;
        println!(
            "|E| = {n}, entries <= {cap}: {} candidates, {} eliminators, {} multiples",
            r.candidates,
            r.eliminators.len(),
            r.multiples.len()
        );
    }

    let mut edges: Vec<_> = (1..=6).map(|i| (i, i % 6 + 1, Rational::one())).collect();
    edges.push((1, 4, Rational::one()));
    let graph = Network::new(false, 6, edges)?;
    println!("hexagon with a diameter: {}", embed_on_cycle(&graph, &[1, 2, 3, 4, 5, 6])?);
    Ok(())
}
