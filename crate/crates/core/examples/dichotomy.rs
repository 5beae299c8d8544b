//! Returns to the inner barrier for a recurrent and a transient growth
//! coefficient, counted per log-time unit.
//!
//! `cargo run --release --example dichotomy -- [n_paths] [J] [dt]`

use growdiff::mc::{self, EnsembleSettings};
use growdiff::model::PowerDrift;

fn main() -> growdiff::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let j: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(8);
    let dt: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-3);
    let drift = PowerDrift::new(1.0, 0.0)?;
    for c in [0.4, 2.0] {
        let r = mc::dichotomy_experiment(drift, c, j, &EnsembleSettings::new(n, dt, 1.0, 15))?;
        println!(
            "c = {c}: analytic {:?}, simulated {:?}; returning {:.2}, silent {:.2}, escaping {:.2}",
            r.analytic.classification, r.empirical, r.returning_fraction, r.silent_fraction, r.escaping_fraction
        );
        let j = j as usize;
        let mean = |k: usize| r.returns.iter().map(|p| p[k] as f64).sum::<f64>() / n as f64;
        println!("  mean returns in the last two units: {:.2}, {:.2}", mean(j - 2), mean(j - 1));
    }
    Ok(())
}
