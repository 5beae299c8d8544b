//! Simulated two-sided exit frequency against the scale-function formula,
//! at step `dt` and at `dt / 2` on the same Brownian paths.
//!
//! `cargo run --release --example hitting_probability -- [n_paths] [dt]`

use growdiff::mc::{self, EnsembleSettings};
use growdiff::model::PowerDrift;

fn main() -> growdiff::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let dt: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(2e-4);
    let settings = EnsembleSettings::new(n, dt, 100.0, 5);
    let check = mc::hitting_check(PowerDrift::new(1.0, 0.0)?, 1.0, 1.5, 2.0, &settings)?;
    for c in [&check.coarse, &check.fine] {
        println!(
            "{:<22} exact {:.5}  estimate {:.5} +- {:.5}  z {:+.2}",
            c.label, c.analytic, c.estimate.mean, c.estimate.std_error, c.z_score
        );
    }
    println!("halving shift: {:.2} SE", check.halving_shift);
    Ok(())
}
