//! Closed-form results for the drifted process: the scale function and its
//! asymptotics, two-sided exit probabilities, hitting-time transforms and
//! bounds, the recurrence/transience classification, and growth constants.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstantDrift, DomainSpec, PowerDrift, RadialBounds};

/// Relative tolerance used when comparing the criterion with 1.
pub const BORDERLINE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Probability,
    MgfValue,
    LaplaceValue,
    UpperBound,
}

/// An analytic hitting quantity together with the parameter range on which
/// the formula holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingLaw {
    pub value: f64,
    pub kind: LawKind,
    pub validity: String,
}

impl HittingLaw {
    fn new(value: f64, kind: LawKind, validity: impl Into<String>) -> Result<Self> {
        let ok = match kind {
            LawKind::Probability => (0.0..=1.0).contains(&value),
            LawKind::LaplaceValue => value > 0.0 && value <= 1.0,
            LawKind::MgfValue => value >= 1.0,
            LawKind::UpperBound => value.is_finite(),
        };
        if !ok {
            return Err(Error::Numeric(format!(
                "{kind:?} value {value} outside its admissible range"
            )));
        }
        Ok(Self {
            value,
            kind,
            validity: validity.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Recurrent,
    Transient,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub classification: Classification,
    pub positive_recurrent: Option<bool>,
    /// `2 b c^(1+gamma) / (1+gamma) - 1` for the branch that decided the verdict.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "order", content = "exponent", rename_all = "snake_case")]
pub enum GrowthOrder {
    PowerLaw(f64),
    Exponential,
    Explosive,
}

/// `ln phi(x)` with `phi(x) = int_x^inf exp(-2 b t^(1+gamma) / (1+gamma)) dt`.
///
/// With `u = k t^p`, `k = 2b/(1+gamma)`, `p = 1+gamma`, this is
/// `(1/p) k^(-1/p) Gamma(1/p, k x^p)`.
pub fn ln_phi(drift: &PowerDrift, x: f64) -> Result<f64> {
    check_state(x)?;
    let p = 1.0 + drift.gamma();
    let k = drift.scale_rate();
    let a = 1.0 / p;
    Ok(-p.ln() - a * k.ln() + special::ln_upper_gamma(a, k * x.powf(p))?)
}

pub fn phi(drift: &PowerDrift, x: f64) -> Result<f64> {
    Ok(ln_phi(drift, x)?.exp())
}

/// `ln` of `x^(-gamma) exp(-2 b x^(1+gamma)/(1+gamma)) / (2b)`.
pub fn ln_phi_asymptotic(drift: &PowerDrift, x: f64) -> Result<f64> {
    check_state(x)?;
    let g = drift.gamma();
    Ok(-(2.0 * drift.b()).ln() - g * x.ln() - drift.scale_rate() * x.powf(1.0 + g))
}

pub fn phi_asymptotic(drift: &PowerDrift, x: f64) -> Result<f64> {
    Ok(ln_phi_asymptotic(drift, x)?.exp())
}

/// `ln` of the radial scale function `int_x^inf t^(1-d) exp(-2 b t^(1+gamma)/(1+gamma)) dt`,
/// normalized with multiplicative constant 1.
pub fn ln_phi_radial(drift: &PowerDrift, dimension: usize, x: f64) -> Result<f64> {
    if dimension < 2 {
        return Err(Error::param("radial scale function needs dimension >= 2"));
    }
    check_state(x)?;
    let p = 1.0 + drift.gamma();
    let k = drift.scale_rate();
    let a = (2.0 - dimension as f64) / p;
    Ok(-p.ln() - a * k.ln() + special::ln_upper_gamma(a, k * x.powf(p))?)
}

pub fn phi_radial(drift: &PowerDrift, dimension: usize, x: f64) -> Result<f64> {
    Ok(ln_phi_radial(drift, dimension, x)?.exp())
}

fn check_state(x: f64) -> Result<()> {
    if !(x >= 1.0) || x.is_infinite() {
        return Err(Error::domain(format!("scale function queried at x = {x}")));
    }
    Ok(())
}

/// `(phi(a) - phi(x)) / (phi(a) - phi(b))` from log-values of a decreasing
/// scale function. Any common additive shift of the logs cancels.
pub fn exit_ratio_from_ln(ln_alpha: f64, ln_x: f64, ln_beta: f64) -> f64 {
    let num = (ln_x - ln_alpha).exp_m1();
    let den = (ln_beta - ln_alpha).exp_m1();
    (num / den).clamp(0.0, 1.0)
}

/// Probability of reaching `beta` before `alpha` from `x`, for drift
/// `b x^gamma` (or its radial reduction in `radial_dimension` dimensions).
pub fn hitting_prob_up(
    drift: &PowerDrift,
    alpha: f64,
    x: f64,
    beta: f64,
    radial_dimension: Option<usize>,
) -> Result<HittingLaw> {
    if !(1.0 <= alpha && alpha <= x && x <= beta && alpha < beta) || beta.is_infinite() {
        return Err(Error::domain(format!(
            "need 1 <= alpha <= x <= beta with alpha < beta, got {alpha}, {x}, {beta}"
        )));
    }
    let validity = format!("1 <= alpha={alpha} <= x <= beta={beta}");
    if x == alpha {
        return HittingLaw::new(0.0, LawKind::Probability, validity);
    }
    if x == beta {
        return HittingLaw::new(1.0, LawKind::Probability, validity);
    }
    let ln = |y: f64| match radial_dimension {
        Some(d) => ln_phi_radial(drift, d, y),
        None => ln_phi(drift, y),
    };
    let p = exit_ratio_from_ln(ln(alpha)?, ln(x)?, ln(beta)?);
    HittingLaw::new(p, LawKind::Probability, validity)
}

/// Rate below which `E exp(lambda T_alpha) <= 2` for the process on
/// `[1, beta]` reflected at `beta`, started in `[alpha, beta]`.
pub fn prop1_lambda_hat(drift: &PowerDrift, alpha: f64, beta: f64) -> Result<f64> {
    if !(1.0 <= alpha && alpha <= beta) || beta.is_infinite() {
        return Err(Error::domain(format!(
            "need 1 <= alpha <= beta, got {alpha}, {beta}"
        )));
    }
    let g = drift.gamma();
    let top = alpha.powf(g).max(beta.powf(g));
    Ok((-(2.0 + 2.0 * drift.b() * top) * (beta - alpha)).exp())
}

/// `E_x exp(D^2/2 T_beta)` for the constant-drift process reflected at 1.
pub fn prop2_mgf(drift: &ConstantDrift, x: f64, beta: f64) -> Result<HittingLaw> {
    if !(1.0 <= x && x <= beta) || beta.is_infinite() {
        return Err(Error::domain(format!("need 1 <= x <= beta, got {x}, {beta}")));
    }
    let d = drift.value();
    let validity = format!("lambda = D^2/2 = {}, 1 <= x <= beta = {beta}", d * d / 2.0);
    if x == beta {
        return HittingLaw::new(1.0, LawKind::MgfValue, validity);
    }
    let lead = (d * (beta - 1.0)).exp() / (1.0 + d * (beta - 1.0));
    let value = lead * (1.0 + d * (x - 1.0)) * (-d * (x - 1.0)).exp();
    HittingLaw::new(value.max(1.0), LawKind::MgfValue, validity)
}

/// `E_beta exp(-lambda T_alpha)` for the constant-drift process reflected at `beta`.
pub fn prop3_laplace(
    drift: &ConstantDrift,
    lambda: f64,
    alpha: f64,
    beta: f64,
) -> Result<HittingLaw> {
    if !(lambda > 0.0) || lambda.is_infinite() {
        return Err(Error::domain(format!("lambda must be > 0, got {lambda}")));
    }
    if !(1.0 <= alpha && alpha <= beta) || beta.is_infinite() {
        return Err(Error::domain(format!(
            "need 1 <= alpha <= beta, got {alpha}, {beta}"
        )));
    }
    let validity = format!("lambda = {lambda} > 0, delta = {}", beta - alpha);
    let delta = beta - alpha;
    if delta == 0.0 {
        return HittingLaw::new(1.0, LawKind::LaplaceValue, validity);
    }
    let d = drift.value();
    let s = (d * d + 2.0 * lambda).sqrt();
    // numerator and denominator divided by exp((s - D) delta)
    let num = 2.0 * s * (-(d + s) * delta).exp();
    let den = (s - d) + (s + d) * (-2.0 * s * delta).exp();
    HittingLaw::new(num / den, LawKind::LaplaceValue, validity)
}

/// Rate below which `E_x exp(lambda tau_beta) <= 2` for the process reflected at `alpha`.
pub fn prop4_lambda_bar(drift: &PowerDrift, alpha: f64, beta: f64) -> Result<f64> {
    if !(1.0 <= alpha && alpha < beta) || beta.is_infinite() {
        return Err(Error::domain(format!(
            "need 1 <= alpha < beta, got {alpha}, {beta}"
        )));
    }
    let g = drift.gamma();
    let low = alpha.powf(g).min(beta.powf(g));
    Ok(drift.b() * low / ((2.0 * std::f64::consts::E - 1.0) * (beta - alpha)))
}

/// `2 b c^(1+gamma) / (1 + gamma)`.
pub fn criterion(drift: &PowerDrift, c: f64) -> f64 {
    let p = 1.0 + drift.gamma();
    2.0 * drift.b() * c.powf(p) / p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Below,
    Equal,
    Above,
}

fn compare_to_one(value: f64) -> Side {
    if (value - 1.0).abs() <= BORDERLINE_TOLERANCE {
        Side::Equal
    } else if value < 1.0 {
        Side::Below
    } else {
        Side::Above
    }
}

/// Positive recurrence from the criterion: `true` strictly below 1, `false`
/// above (transient), unknown at criticality.
pub fn positive_recurrent(drift: &PowerDrift, c: f64) -> Option<bool> {
    positive_from_side(compare_to_one(criterion(drift, c)))
}

fn positive_from_side(side: Side) -> Option<bool> {
    match side {
        Side::Below => Some(true),
        Side::Equal => None,
        Side::Above => Some(false),
    }
}

/// Recurrence/transience of the one-dimensional process with drift
/// `b x^gamma` in `(1, c (log t)^(1/(1+gamma)))`.
pub fn classify_1d(drift: &PowerDrift, c: f64) -> Result<Verdict> {
    if !(c > 0.0) || c.is_infinite() {
        return Err(Error::param(format!("growth coefficient c must be > 0, got {c}")));
    }
    let value = criterion(drift, c);
    let side = compare_to_one(value);
    let classification = match side {
        Side::Below => Classification::Recurrent,
        Side::Above => Classification::Transient,
        Side::Equal if drift.gamma() >= -0.5 => Classification::Recurrent,
        Side::Equal => Classification::Undetermined,
    };
    Ok(Verdict {
        classification,
        positive_recurrent: positive_from_side(side),
        margin: value - 1.0,
    })
}

/// Multi-dimensional classification through the radial bounds. `c` is the
/// coefficient of the growth function; the recurrence branch scales it by
/// `rad+(K)`, the transience branch by `rad-(K)`.
pub fn classify_multid(
    bounds: &RadialBounds,
    domain: &DomainSpec,
    c: f64,
    f_energy_finite: bool,
) -> Result<Verdict> {
    if domain.dimension() < 2 {
        return Err(Error::param("dimension 1: use classify_1d"));
    }
    if !(c > 0.0) || c.is_infinite() {
        return Err(Error::param(format!("growth coefficient c must be > 0, got {c}")));
    }
    let rec_value = criterion(bounds.b_plus(), c * domain.rad_plus());
    let trans_value = criterion(bounds.b_minus(), c * domain.rad_minus());
    let hypothesis = domain.is_ball() || f_energy_finite;
    let rec_side = compare_to_one(rec_value);
    let recurrent = hypothesis
        && match rec_side {
            Side::Below => true,
            Side::Equal => domain.dimension() == 2 && bounds.b_plus().gamma() >= 0.0,
            Side::Above => false,
        };
    if recurrent {
        return Ok(Verdict {
            classification: Classification::Recurrent,
            positive_recurrent: positive_from_side(rec_side),
            margin: rec_value - 1.0,
        });
    }
    if compare_to_one(trans_value) == Side::Above {
        return Ok(Verdict {
            classification: Classification::Transient,
            positive_recurrent: Some(false),
            margin: trans_value - 1.0,
        });
    }
    Ok(Verdict {
        classification: Classification::Undetermined,
        positive_recurrent: None,
        margin: rec_value - 1.0,
    })
}

/// `liminf X(t)/f(t) = (1 - (1+gamma) / (2 b c^(1+gamma)))^(1/(1+gamma))` in
/// the transient regime with `gamma in (-1, 1)`.
pub fn liminf_constant(drift: &PowerDrift, c: f64) -> Result<f64> {
    let g = drift.gamma();
    if !(g < 1.0) {
        return Err(Error::param(format!("liminf constant needs gamma < 1, got {g}")));
    }
    let value = criterion(drift, c);
    if compare_to_one(value) != Side::Above {
        return Err(Error::domain(format!(
            "criterion {value} <= 1: the process is recurrent and the constant is undefined"
        )));
    }
    Ok((1.0 - 1.0 / value).powf(1.0 / (1.0 + g)))
}

/// Threshold exponent `q0` for the deviation `f(t) - X(t)` when `f(t) = t^l`.
pub fn deviation_exponent_q0(gamma: f64, l: f64) -> Result<f64> {
    if !(gamma > -1.0 && gamma < 1.0) {
        return Err(Error::param(format!("gamma must lie in (-1, 1), got {gamma}")));
    }
    let l_max = 1.0 / (1.0 - gamma);
    if !(l > 0.0 && l < l_max) {
        return Err(Error::param(format!(
            "l must lie in (0, {l_max}) for gamma = {gamma}, got {l}"
        )));
    }
    Ok(if gamma >= 0.0 { 0.0 } else { -l * gamma })
}

/// Growth order of the process on `[1, inf)` reflected at 1 with drift `b x^gamma`.
pub fn unconstrained_growth_order(gamma: f64) -> Result<GrowthOrder> {
    if !(gamma > -1.0) || gamma.is_infinite() {
        return Err(Error::param(format!("gamma must be > -1, got {gamma}")));
    }
    Ok(if gamma < 1.0 {
        GrowthOrder::PowerLaw(1.0 / (1.0 - gamma))
    } else if gamma == 1.0 {
        GrowthOrder::Exponential
    } else {
        GrowthOrder::Explosive
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GrowthFunction, Shape};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn drift(b: f64, g: f64) -> PowerDrift {
        PowerDrift::new(b, g).unwrap()
    }

    #[test]
    fn phi_constant_drift_closed_form() {
        let d = drift(1.0, 0.0);
        assert_relative_eq!(phi(&d, 1.0).unwrap(), (-2f64).exp() / 2.0, max_relative = 1e-13);
        assert_relative_eq!(phi(&d, 2.0).unwrap(), (-4f64).exp() / 2.0, max_relative = 1e-13);
        // far tail, where the plain value underflows
        assert_relative_eq!(ln_phi(&d, 1000.0).unwrap(), -2000.0 - 2f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn phi_asymptotic_examples() {
        let d = drift(1.0, 0.0);
        assert_relative_eq!(
            phi_asymptotic(&d, 10.0).unwrap(),
            (-20f64).exp() / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            phi_asymptotic(&d, 10.0).unwrap(),
            phi(&d, 10.0).unwrap(),
            max_relative = 1e-12
        );
        let d = drift(1.0, 1.0);
        assert_relative_eq!(
            phi_asymptotic(&d, 10.0).unwrap(),
            0.5 * 0.1 * (-100f64).exp(),
            max_relative = 1e-14
        );
        let ratio = (ln_phi(&d, 50.0).unwrap() - ln_phi_asymptotic(&d, 50.0).unwrap()).exp();
        assert!((0.99..=1.01).contains(&ratio));
    }

    #[test]
    fn phi_radial_needs_two_dimensions() {
        assert!(phi_radial(&drift(1.0, 0.0), 1, 2.0).is_err());
        assert!(phi(&drift(1.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn hitting_probability_examples() {
        let d = drift(1.0, 0.0);
        let e = |x: f64| (-x).exp();
        let expect = (e(2.0) - e(3.0)) / (e(2.0) - e(4.0));
        let p = hitting_prob_up(&d, 1.0, 1.5, 2.0, None).unwrap();
        assert_relative_eq!(p.value, expect, max_relative = 1e-12);
        assert!((p.value - 0.7311).abs() < 1e-4);
        assert_eq!(p.kind, LawKind::Probability);
        assert_eq!(hitting_prob_up(&d, 1.0, 1.0, 2.0, None).unwrap().value, 0.0);
        assert_eq!(hitting_prob_up(&d, 1.0, 2.0, 2.0, None).unwrap().value, 1.0);
        assert!(matches!(
            hitting_prob_up(&d, 1.5, 1.2, 2.0, None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hitting_probability_deep_tail() {
        // phi values near e^-2000: naive subtraction would give 0/0
        let d = drift(1.0, 0.0);
        let p = hitting_prob_up(&d, 1000.0, 1000.5, 1001.0, None).unwrap().value;
        let expect = (1.0 - (-1f64).exp()) / (1.0 - (-2f64).exp());
        assert_relative_eq!(p, expect, max_relative = 1e-10);
    }

    #[test]
    fn lambda_hat_examples() {
        let d = drift(1.0, 0.0);
        assert_eq!(prop1_lambda_hat(&d, 1.5, 1.5).unwrap(), 1.0);
        assert_relative_eq!(prop1_lambda_hat(&d, 1.0, 2.0).unwrap(), (-4f64).exp());
        assert_relative_eq!(
            prop1_lambda_hat(&drift(1.0, 1.0), 1.0, 2.0).unwrap(),
            (-6f64).exp()
        );
    }

    #[test]
    fn prop2_examples() {
        let d = ConstantDrift::new(1.0).unwrap();
        assert_eq!(prop2_mgf(&d, 2.0, 2.0).unwrap().value, 1.0);
        let v = prop2_mgf(&d, 1.0, 2.0).unwrap();
        assert_relative_eq!(v.value, std::f64::consts::E / 2.0, max_relative = 1e-15);
        assert!((v.value - 1.35914).abs() < 1e-5);
        assert!(prop2_mgf(&d, 2.5, 2.0).is_err());
    }

    #[test]
    fn prop3_examples() {
        let d = ConstantDrift::new(1.0).unwrap();
        assert_eq!(prop3_laplace(&d, 1.0, 2.0, 2.0).unwrap().value, 1.0);
        // closed form before rescaling
        let s = 3f64.sqrt();
        let literal = 2.0 * s * (-2f64).exp()
            / ((s - 1.0) * (s - 1.0).exp() + (s + 1.0) * (-1.0 - s).exp());
        let v = prop3_laplace(&d, 1.0, 1.0, 2.0).unwrap().value;
        assert_relative_eq!(v, literal, max_relative = 1e-14);
        assert!((v - 0.275774).abs() < 1e-6);
        assert!((prop3_laplace(&d, 1e-8, 1.0, 2.0).unwrap().value - 1.0).abs() <= 1e-6);
        assert!(prop3_laplace(&d, 0.0, 1.0, 2.0).is_err());
        assert!(prop3_laplace(&d, -1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn lambda_bar_examples() {
        let e2 = 2.0 * std::f64::consts::E - 1.0;
        assert_relative_eq!(prop4_lambda_bar(&drift(1.0, 0.0), 1.0, 2.0).unwrap(), 1.0 / e2);
        assert_relative_eq!(prop4_lambda_bar(&drift(2.0, 1.0), 1.0, 3.0).unwrap(), 1.0 / e2);
        assert!(prop4_lambda_bar(&drift(1.0, 0.0), 2.0, 2.0).is_err());
    }

    #[test]
    fn classify_1d_examples() {
        let v = classify_1d(&drift(1.0, 0.0), 0.4).unwrap();
        assert_eq!(v.classification, Classification::Recurrent);
        assert_relative_eq!(v.margin, -0.2, max_relative = 1e-12);
        assert_eq!(v.positive_recurrent, Some(true));

        let v = classify_1d(&drift(1.0, 0.0), 2.0).unwrap();
        assert_eq!(v.classification, Classification::Transient);
        assert_relative_eq!(v.margin, 3.0);
        assert_eq!(v.positive_recurrent, Some(false));

        let v = classify_1d(&drift(1.0, 0.0), 0.5).unwrap();
        assert_eq!(v.classification, Classification::Recurrent);
        assert_eq!(v.positive_recurrent, None);

        let c = (0.25f64 / 2.0).powf(1.0 / 0.25);
        let v = classify_1d(&drift(1.0, -0.75), c).unwrap();
        assert_eq!(v.classification, Classification::Undetermined);
        assert_eq!(v.positive_recurrent, None);
    }

    #[test]
    fn classify_multid_examples() {
        let f = GrowthFunction::canonical(0.3, 0.0).unwrap();
        let ball3 = DomainSpec::new(3, Shape::Ball { radius: 1.0 }, f).unwrap();
        let bounds = RadialBounds::radial(drift(1.0, 0.0));
        let v = classify_multid(&bounds, &ball3, 0.3, false).unwrap();
        assert_eq!(v.classification, Classification::Recurrent);

        let star = DomainSpec::new(
            3,
            Shape::StarBody {
                rad_minus: 0.5,
                rad_plus: 1.0,
            },
            f,
        )
        .unwrap();
        let v = classify_multid(&bounds, &star, 0.3, false).unwrap();
        assert_eq!(v.classification, Classification::Undetermined);
        let v = classify_multid(&bounds, &star, 0.3, true).unwrap();
        assert_eq!(v.classification, Classification::Recurrent);

        let ball2 = DomainSpec::new(2, Shape::Ball { radius: 1.0 }, f).unwrap();
        let v = classify_multid(&bounds, &ball2, 0.5, false).unwrap();
        assert_eq!(v.classification, Classification::Recurrent);
        assert_eq!(v.positive_recurrent, None);
        // same criterion in d = 3 is open
        let v = classify_multid(&bounds, &ball3, 0.5, false).unwrap();
        assert_eq!(v.classification, Classification::Undetermined);

        let v = classify_multid(&bounds, &ball3, 2.0, false).unwrap();
        assert_eq!(v.classification, Classification::Transient);

        let line = DomainSpec::interval(f);
        assert!(classify_multid(&bounds, &line, 0.3, false).is_err());
    }

    #[test]
    fn liminf_examples() {
        assert_relative_eq!(liminf_constant(&drift(1.0, 0.0), 1.0).unwrap(), 0.5);
        let big = liminf_constant(&drift(1.0, 0.0), 1e9).unwrap();
        assert!(big > 1.0 - 1e-8 && big < 1.0);
        assert!(matches!(
            liminf_constant(&drift(1.0, 0.0), 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn q0_examples() {
        assert_eq!(deviation_exponent_q0(0.5, 1.0).unwrap(), 0.0);
        assert_relative_eq!(deviation_exponent_q0(-0.5, 0.5).unwrap(), 0.25);
        assert!(deviation_exponent_q0(-0.5, 3.0).is_err());
    }

    #[test]
    fn growth_order_examples() {
        assert_eq!(unconstrained_growth_order(0.0).unwrap(), GrowthOrder::PowerLaw(1.0));
        assert_eq!(unconstrained_growth_order(1.0).unwrap(), GrowthOrder::Exponential);
        assert_eq!(unconstrained_growth_order(2.0).unwrap(), GrowthOrder::Explosive);
        assert!(unconstrained_growth_order(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn phi_strictly_decreasing(b in 0.05f64..5.0, g in -0.9f64..2.0, x in 1.0f64..20.0, dx in 1e-3f64..5.0) {
            let d = drift(b, g);
            prop_assert!(ln_phi(&d, x).unwrap() > ln_phi(&d, x + dx).unwrap());
        }

        #[test]
        fn phi_matches_asymptote_far_out(b in 0.1f64..5.0, g in -0.5f64..2.0) {
            let d = drift(b, g);
            // relative error of the asymptote is about |1 - 1/(1+g)| / (k x^(1+g))
            let x = (200.0 / d.scale_rate()).powf(1.0 / (1.0 + g)).max(1.0);
            let r = (ln_phi(&d, x).unwrap() - ln_phi_asymptotic(&d, x).unwrap()).exp();
            prop_assert!((r - 1.0).abs() <= 1e-2, "ratio {}", r);
        }

        #[test]
        fn hitting_prob_monotone(b in 0.1f64..3.0, g in -0.9f64..1.5, a in 1.0f64..3.0, w in 0.1f64..3.0, s in 0.01f64..0.98, t in 0.01f64..0.98) {
            let d = drift(b, g);
            let (beta, lo, hi) = (a + w, s.min(t), s.max(t));
            prop_assume!(hi - lo > 1e-3);
            let p_lo = hitting_prob_up(&d, a, a + lo * w, beta, None).unwrap().value;
            let p_hi = hitting_prob_up(&d, a, a + hi * w, beta, None).unwrap().value;
            // both saturate at 1 when the drift makes the upper exit certain to rounding
            prop_assert!(p_lo < p_hi || p_hi > 1.0 - 1e-12);
            prop_assert!(p_lo <= p_hi);
            prop_assert!((0.0..=1.0).contains(&p_lo));
        }

        #[test]
        fn exit_ratio_invariant_under_scaling(la in -50.0f64..0.0, dx in 0.01f64..5.0, db in 0.01f64..5.0, shift in -300.0f64..300.0) {
            let (lx, lb) = (la - dx, la - dx - db);
            let p = exit_ratio_from_ln(la, lx, lb);
            let q = exit_ratio_from_ln(la + shift, lx + shift, lb + shift);
            prop_assert!((p - q).abs() <= 1e-12);
        }

        #[test]
        fn prop2_at_least_one(d in 0.05f64..5.0, beta in 1.01f64..5.0, s in 0.0f64..1.0) {
            let x = 1.0 + s * (beta - 1.0);
            let v = prop2_mgf(&ConstantDrift::new(d).unwrap(), x, beta).unwrap().value;
            prop_assert!(v >= 1.0);
        }

        #[test]
        fn prop3_decreasing_in_lambda(d in 0.05f64..3.0, l1 in 1e-4f64..10.0, l2 in 1e-4f64..10.0, w in 0.05f64..3.0) {
            prop_assume!((l1 - l2).abs() > 1e-6);
            let cd = ConstantDrift::new(d).unwrap();
            let v1 = prop3_laplace(&cd, l1.min(l2), 1.0, 1.0 + w).unwrap().value;
            let v2 = prop3_laplace(&cd, l1.max(l2), 1.0, 1.0 + w).unwrap().value;
            prop_assert!(v1 > v2);
            prop_assert!(v2 > 0.0 && v1 <= 1.0);
        }

        #[test]
        fn classification_depends_on_criterion_only(g in -0.9f64..2.0, b1 in 0.1f64..5.0, b2 in 0.1f64..5.0, crit in 0.2f64..3.0) {
            // choose c so that 2 b c^(1+g)/(1+g) = crit for both amplitudes
            let c_of = |b: f64| (crit * (1.0 + g) / (2.0 * b)).powf(1.0 / (1.0 + g));
            let v1 = classify_1d(&drift(b1, g), c_of(b1)).unwrap();
            let v2 = classify_1d(&drift(b2, g), c_of(b2)).unwrap();
            prop_assert_eq!(v1.classification, v2.classification);
            prop_assert_eq!(v1.positive_recurrent, v2.positive_recurrent);
        }

        #[test]
        fn liminf_in_unit_interval(g in -0.9f64..0.9, b in 0.1f64..5.0, excess in 1e-6f64..10.0) {
            let d = drift(b, g);
            let c = ((1.0 + excess) * (1.0 + g) / (2.0 * b)).powf(1.0 / (1.0 + g));
            let v = liminf_constant(&d, c).unwrap();
            prop_assert!(v > 0.0 && v < 1.0);
        }

        #[test]
        fn rate_bounds_shrink_with_width(b in 0.1f64..5.0, g in -0.9f64..2.0, a in 1.0f64..5.0, w1 in 0.01f64..3.0, w2 in 0.01f64..3.0) {
            prop_assume!((w1 - w2).abs() > 1e-6);
            let d = drift(b, g);
            let (short, long) = (w1.min(w2), w1.max(w2));
            let top = (a + long).powf(g).max(a.powf(g));
            prop_assume!((2.0 + 2.0 * b * top) * long < 700.0);
            let h1 = prop1_lambda_hat(&d, a, a + short).unwrap();
            let h2 = prop1_lambda_hat(&d, a, a + long).unwrap();
            prop_assert!(h1 > 0.0 && h2 > 0.0 && h2 < h1);
            // lambda_bar: both endpoints fixed at a, extended width
            let l1 = prop4_lambda_bar(&d, a, a + short).unwrap();
            let l2 = prop4_lambda_bar(&d, a, a + long).unwrap();
            prop_assert!(l1 > 0.0 && l2 > 0.0 && l2 < l1);
        }
    }

    #[test]
    fn liminf_vanishes_at_criticality() {
        let d = drift(1.0, 0.0);
        let v = liminf_constant(&d, 0.5 * (1.0 + 1e-9)).unwrap();
        assert!(v < 1e-8);
    }
}
