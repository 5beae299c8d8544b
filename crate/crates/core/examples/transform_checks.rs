//! Simulated hitting-time transforms against their closed forms.
//!
//! `cargo run --release --example transform_checks -- [n_paths] [dt]`

use growdiff::mc::{self, EnsembleSettings};
use growdiff::model::{ConstantDrift, PowerDrift};

fn main() -> growdiff::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let dt: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-3);
    let settings = EnsembleSettings::new(n, dt, 200.0, 7);
    let unit = ConstantDrift::new(1.0)?;

    let mgf = mc::mgf_check(unit, 1.0, 2.0, &settings)?;
    let lap = mc::laplace_check(unit, 1.0, 1.0, 2.0, &settings)?;
    for c in [&mgf, &lap] {
        println!(
            "{:<8} exact {:.6}  estimate {:.6} +- {:.6}  z {:+.2}",
            c.label, c.analytic, c.estimate.mean, c.estimate.std_error, c.z_score
        );
    }

    let drift = PowerDrift::new(1.0, 0.0)?;
    for b in [
        mc::lambda_hat_check(drift, 1.0, 2.0, 2.0, &settings)?,
        mc::lambda_bar_check(drift, 1.0, 2.0, 1.0, &settings)?,
    ] {
        println!(
            "{:<10} lambda {:.6}  estimate {:.6} +- {:.6}  (bound {})",
            b.label, b.lambda, b.estimate.mean, b.estimate.std_error, b.bound
        );
    }
    Ok(())
}
