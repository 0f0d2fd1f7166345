//! For each inequality of the triangle's minimal description, the homogeneous
//! system whose solutions eliminate it, a small integral solution, and the
//! size of its largest entry against the cubic bound.
//!
//! ```bash
//! cargo run --example elimination_system
//! ```

use routecap::elimination::{build_elimination_system, check_entry_size_bound, minimal_description, DEFAULT_ENUMERATION_CAP};
use routecap::network::triangle_problem;
use routecap::{Rational, Result};

fn main() -> Result<()> {
    let problem = triangle_problem(Rational::one())?;
    let desc = minimal_description(&problem, 1, DEFAULT_ENUMERATION_CAP)?;
    for ineq in desc.inequalities() {
        let f = &ineq.distance;
        let sys = build_elimination_system(&problem, f)?;
        let report = check_entry_size_bound(&problem, f)?;
        println!(
            "{f}: {} rows, unit entries {}, f solves it {}, solution {} uses {} of {} bits",
            sys.num_rows(),
            sys.entries_are_unit(),
            sys.satisfied_by(f.values()),
            report.solution,
            report.max_entry_size.bits,
            report.bound_bits
        );
    }
    Ok(())
}
