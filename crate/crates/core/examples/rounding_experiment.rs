//! Randomized rounding on the 8-ring: most random distance functions with a
//! huge maximum entry are eliminated by a rounded copy whose entries, after
//! rescaling, are polynomial in |E|.
//!
//! ```bash
//! cargo run --release --example rounding_experiment -- 200 7
//! ```

use num_bigint::BigUint;
use routecap::network::SessionPolicy;
use routecap::ring_lab::{rounding_experiment, RingConfig, RoundingParams};
use routecap::Result;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|a| a.parse().ok()).unwrap_or(50);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let ring = RingConfig::new(8, SessionPolicy::AllMulticast)?;
    let params = RoundingParams {
        m: 6,
        g_max: BigUint::from(8u32).pow(7),
        trials,
        seed,
    };
    let report = rounding_experiment(&ring, &params)?;
    println!("grid phi = {}, threshold = {}", report.phi, params.threshold(8)?);
    println!("{} of {} trials succeeded", report.successes, report.trials);
    println!("guaranteed success probability: {}", report.success_bound);
    println!("residual violations over {} arc pairs: {}", report.pairs, report.residual_violations);
    Ok(())
}
