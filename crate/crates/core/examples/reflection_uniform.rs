//! Zero-drift motion reflected in `[0, 1]` forgets its start: terminal
//! states approach the uniform law.
//!
//! `cargo run --release --example reflection_uniform -- [n_paths] [dt] [t]`

use growdiff::mc::{self, EnsembleSettings};

fn main() -> growdiff::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10_000);
    let dt: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-3);
    let t: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let states = mc::reflected_uniform_states(&EnsembleSettings::new(n, dt, t, 21))?;
    let ks = mc::ks_uniform(&states, 0.0, 1.0);
    println!("KS distance from uniform over {n} states: {ks:.4} (1.36/sqrt(n) = {:.4})", 1.36 / (n as f64).sqrt());
    Ok(())
}
