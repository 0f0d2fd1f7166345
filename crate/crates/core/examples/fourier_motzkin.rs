//! The exact capacity region by projecting the subtree-flow polytope onto the
//! session rates, compared with the minimal 0/1 description.
//!
//! ```bash
//! cargo run --release --example fourier_motzkin
//! ```

use routecap::elimination::{minimal_description, DEFAULT_ENUMERATION_CAP};
use routecap::network::{ring_problem, triangle_problem, SessionPolicy};
use routecap::oracle::{region_from_network, regions_equal, DEFAULT_ROW_CAP};
use routecap::{Rational, Result};

fn main() -> Result<()> {
    let instances = [
        ("triangle", triangle_problem(Rational::one())?),
        ("4-ring", ring_problem(4, SessionPolicy::UnicastBroadcast, Rational::one())?),
    ];
    for (name, problem) in instances {
        let region = region_from_network(&problem, DEFAULT_ROW_CAP)?;
        println!(
            "{name}: {} flow variables and {} rows project to {} facets",
            region.source_vars,
            region.source_rows,
            region.rows.len()
        );
        for rec in region.to_records().iter().take(4) {
            println!("  {rec}");
        }
        let desc = minimal_description(&problem, 1, DEFAULT_ENUMERATION_CAP)?;
        let ineqs: Vec<_> = desc.inequalities().collect();
        println!("  same region as the {} survivors: {}", desc.len(), regions_equal(&region, &ineqs)?);
    }
    Ok(())
}
