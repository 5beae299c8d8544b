//! Recurrence verdicts across the critical value of the criterion.

use growdiff::analytic::{self, Classification};
use growdiff::model::{DomainSpec, GrowthFunction, PowerDrift, RadialBounds, Shape};

fn main() -> growdiff::Result<()> {
    println!("{:>6} {:>6} {:>8} {:>10}  verdict", "b", "gamma", "c", "criterion");
    for (b, gamma, c) in [(1.0, 0.0, 0.4), (1.0, 0.0, 0.5), (1.0, 0.0, 2.0), (1.0, -0.75, 0.25), (2.0, 1.0, 0.8)] {
        let d = PowerDrift::new(b, gamma)?;
        let v = analytic::classify_1d(&d, c)?;
        println!(
            "{b:>6} {gamma:>6} {c:>8} {:>10.4}  {:?} (positive recurrent: {:?})",
            analytic::criterion(&d, c),
            v.classification,
            v.positive_recurrent
        );
        if v.classification == Classification::Transient && gamma < 1.0 {
            println!("{:>34}liminf X/f = {:.4}", "", analytic::liminf_constant(&d, c)?);
        }
    }

    let d = PowerDrift::new(1.0, 0.0)?;
    for dim in [2, 3] {
        let domain = DomainSpec::new(dim, Shape::Ball { radius: 1.0 }, GrowthFunction::canonical(0.5, 0.0)?)?;
        let v = analytic::classify_multid(&RadialBounds::radial(d), &domain, 0.5, false)?;
        println!("ball, d = {dim}, criterion 1: {:?}", v.classification);
    }
    Ok(())
}
