//! Deviation `f - X` below a power-law domain: fitted log-log slope against
//! the predicted exponent, with a control case where the exponent is zero,
//! and the ratio `X/f` below a logarithmic domain.
//!
//! `cargo run --release --example growth_exponent -- [n_paths] [dt] [t_max]`

use growdiff::analytic;
use growdiff::mc::{self, EnsembleSettings};
use growdiff::model::{GrowthFunction, PowerDrift};
use growdiff::sde::SamplingPlan;

fn main() -> growdiff::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let dt: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-2);
    let t_max: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e5);
    let plan = SamplingPlan { ratio: 1.01, ..SamplingPlan::default() };
    let settings = EnsembleSettings::new(n, dt, t_max, 17);
    for (gamma, l) in [(-0.5, 0.5), (0.5, 1.0)] {
        let drift = PowerDrift::new(1.0, gamma)?;
        let q0 = analytic::deviation_exponent_q0(gamma, l)?;
        let paths = mc::moving_domain_ensemble(drift, GrowthFunction::power(l)?, &settings, plan)?;
        let r = mc::growth_report(&paths, (t_max / 100.0, t_max), &[q0])?;
        println!(
            "gamma = {gamma}, f = t^{l}: q0 = {q0}, median slope {:.3}, mean X/f {:.4}",
            mc::median(&r.per_path_slope),
            r.mean_ratio.mean
        );
    }
    let drift = PowerDrift::new(1.0, 0.0)?;
    let s = EnsembleSettings::new(n, 1e-3, 1e4, 19);
    let paths = mc::moving_domain_ensemble(drift, GrowthFunction::log_power(1.0, 2.0)?, &s, SamplingPlan::default())?;
    let r = mc::growth_report(&paths, (1e3, 1e4), &[])?;
    println!("gamma = 0, f = (log t)^2: mean X/f on [1e3, 1e4] = {:.4}", r.mean_ratio.mean);
    Ok(())
}
