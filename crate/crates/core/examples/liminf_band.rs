//! Lower growth ratio `min X/f` over a late window in the critical transient
//! regime, against the predicted liminf constant.
//!
//! `cargo run --release --example liminf_band -- [n_paths] [dt]`

use growdiff::analytic;
use growdiff::mc::{self, EnsembleSettings};
use growdiff::model::{GrowthFunction, PowerDrift};
use growdiff::sde::SamplingPlan;

fn main() -> growdiff::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let dt: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-3);
    let (b, gamma, c) = (1.0, 0.0, 1.0);
    let drift = PowerDrift::new(b, gamma)?;
    let window = (5f64.exp(), 10f64.exp());
    let settings = EnsembleSettings::new(n, dt, window.1, 16);
    let paths = mc::moving_domain_ensemble(drift, GrowthFunction::canonical(c, gamma)?, &settings, SamplingPlan::default())?;
    let report = mc::growth_report(&paths, window, &[])?;
    let lowest = report.per_path_min_ratio.iter().copied().fold(f64::INFINITY, f64::min);
    println!("predicted liminf constant {:.4}", analytic::liminf_constant(&drift, c)?);
    println!(
        "sampled X/f: median per-path min {:.4}, lowest {:.4}, mean {:.4}",
        mc::median(&report.per_path_min_ratio),
        lowest,
        report.mean_ratio.mean
    );
    println!("every grid point: mean per-path min {:.4}", report.grid_min_ratio.mean);
    Ok(())
}
