//! Scale function of the drift `b x^gamma` next to its large-x asymptote,
//! and the two-sided exit probability it produces.

use growdiff::analytic;
use growdiff::model::PowerDrift;

fn main() -> growdiff::Result<()> {
    for (b, gamma) in [(1.0, 0.0), (1.0, -0.5), (0.5, 1.0)] {
        let d = PowerDrift::new(b, gamma)?;
        println!("b = {b}, gamma = {gamma}");
        println!("  {:>6} {:>14} {:>14}", "x", "ln phi", "ln asymptote");
        for x in [1.0, 2.0, 4.0, 8.0, 16.0] {
            println!(
                "  {x:>6} {:>14.8} {:>14.8}",
                analytic::ln_phi(&d, x)?,
                analytic::ln_phi_asymptotic(&d, x)?
            );
        }
        let p = analytic::hitting_prob_up(&d, 1.0, 1.5, 2.0, None)?;
        println!("  P_1.5(reach 2 before 1) = {:.6}", p.value);
    }
    let d = PowerDrift::new(1.0, 0.0)?;
    println!(
        "radial, d = 3: P_1.5(reach 2 before 1) = {:.6}",
        analytic::hitting_prob_up(&d, 1.0, 1.5, 2.0, Some(3))?.value
    );
    Ok(())
}
