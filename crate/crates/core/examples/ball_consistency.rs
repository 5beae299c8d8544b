//! Exit probability from an annulus in the unit-core ball, simulated through
//! the radial process and in full dimension, against the Bessel formula.
//!
//! `cargo run --release --example ball_consistency -- [n_paths] [dt]`

use growdiff::mc::{self, EnsembleSettings};

fn main() -> growdiff::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let dt: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-4);
    let settings = EnsembleSettings::new(n, dt, 100.0, 18);
    let check = mc::ball_check(3, None, 1.0, 1.5, 2.0, 2.5, &settings)?;
    for c in [&check.radial, &check.full] {
        println!(
            "{:<7} exact {:.5}  estimate {:.5} +- {:.5}  z {:+.2}",
            c.label, c.analytic, c.estimate.mean, c.estimate.std_error, c.z_score
        );
    }
    println!("radial vs full: z {:+.2}", check.mode_z);
    Ok(())
}
