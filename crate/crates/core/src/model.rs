//! Parameter objects shared by the rest of the crate: drift fields, the
//! growth function `f(t)` of the moving boundary, and domain geometry.
//!
//! Every type here is immutable after construction and cheap to clone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Height of the flat initial segment used by the log-type and power growth
/// functions, so that `f(0) > 1`.
pub const GROWTH_FLOOR: f64 = 2.0;

/// Drift `B(x) = b * x^gamma` on `[1, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDrift {
    b: f64,
    gamma: f64,
}

impl PowerDrift {
    pub fn new(b: f64, gamma: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::param(format!("drift amplitude b must be > 0, got {b}")));
        }
        if !(gamma.is_finite() && gamma > -1.0) {
            return Err(Error::param(format!(
                "drift exponent gamma must be > -1, got {gamma}"
            )));
        }
        Ok(Self { b, gamma })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `b * x^gamma`, rejecting `x < 1` where the process never lives.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 1.0) {
            return Err(Error::domain(format!("drift queried at x = {x} < 1")));
        }
        Ok(self.at(x))
    }

    /// Unchecked evaluation for the simulation loop. Queries below 1 are
    /// clamped to 1.
    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        let x = x.max(1.0);
        let g = self.gamma;
        if g == 0.0 {
            self.b
        } else if g == 1.0 {
            self.b * x
        } else if g == 0.5 {
            self.b * x.sqrt()
        } else if g == -0.5 {
            self.b / x.sqrt()
        } else {
            self.b * x.powf(g)
        }
    }

    /// `2 b / (1 + gamma)`, the coefficient of `t^(1+gamma)` in the scale
    /// function exponent.
    pub(crate) fn scale_rate(&self) -> f64 {
        2.0 * self.b / (1.0 + self.gamma)
    }
}

/// Constant drift `D > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantDrift {
    d_value: f64,
}

impl ConstantDrift {
    pub fn new(d_value: f64) -> Result<Self> {
        if !(d_value.is_finite() && d_value > 0.0) {
            return Err(Error::param(format!("constant drift must be > 0, got {d_value}")));
        }
        Ok(Self { d_value })
    }

    pub fn value(&self) -> f64 {
        self.d_value
    }
}

/// Radius `f(t)` of the moving boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthFunction {
    /// `f(t) = value` for all t.
    Constant { value: f64 },
    /// `f(t) = max(2, c (log t)^exponent)`.
    LogPower { c: f64, exponent: f64 },
    /// `f(t) = max(2, t^l)`.
    Power { l: f64 },
    /// `2` on `[0, exp((2/c)^(1+gamma))]`, `c (log t)^(1/(1+gamma))` after.
    CanonicalPiecewise { c: f64, gamma: f64 },
}

impl GrowthFunction {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 1.0) {
            return Err(Error::param(format!("constant radius must exceed 1, got {value}")));
        }
        Ok(Self::Constant { value })
    }

    pub fn log_power(c: f64, exponent: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param(format!("growth coefficient c must be > 0, got {c}")));
        }
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::param(format!(
                "log-power exponent must be > 0, got {exponent}"
            )));
        }
        Ok(Self::LogPower { c, exponent })
    }

    pub fn power(l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::param(format!("power exponent l must be > 0, got {l}")));
        }
        Ok(Self::Power { l })
    }

    pub fn canonical(c: f64, gamma: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param(format!("growth coefficient c must be > 0, got {c}")));
        }
        if !(gamma.is_finite() && gamma > -1.0) {
            return Err(Error::param(format!("gamma must be > -1, got {gamma}")));
        }
        Ok(Self::CanonicalPiecewise { c, gamma })
    }

    /// Time at which a canonical or log-type function leaves its flat segment.
    pub fn junction_time(&self) -> Option<f64> {
        match *self {
            Self::Constant { .. } => None,
            Self::LogPower { c, exponent } => {
                Some((GROWTH_FLOOR / c).powf(1.0 / exponent).exp())
            }
            Self::Power { l } => Some(GROWTH_FLOOR.powf(1.0 / l)),
            Self::CanonicalPiecewise { c, gamma } => {
                Some((GROWTH_FLOOR / c).powf(1.0 + gamma).exp())
            }
        }
    }

    /// Checked `f(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t.is_infinite() {
            return Err(Error::domain(format!("growth function queried at t = {t}")));
        }
        Ok(self.at(t))
    }

    /// Checked `f(t)` for a process whose drift has exponent `gamma`; power
    /// growth must stay below the free growth order `t^(1/(1-gamma))`.
    pub fn eval_with_drift(&self, t: f64, gamma: f64) -> Result<f64> {
        self.check_against_drift(gamma)?;
        self.eval(t)
    }

    pub fn check_against_drift(&self, gamma: f64) -> Result<()> {
        if let Self::Power { l } = *self {
            if gamma < 1.0 && l >= 1.0 / (1.0 - gamma) {
                return Err(Error::param(format!(
                    "power growth l = {l} must be below 1/(1-gamma) = {}",
                    1.0 / (1.0 - gamma)
                )));
            }
        }
        Ok(())
    }

    /// Unchecked `f(t)` for `t >= 0`.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::LogPower { c, exponent } => log_branch(t, c, exponent).max(GROWTH_FLOOR),
            Self::Power { l } => {
                let v = if l == 0.5 {
                    t.sqrt()
                } else if l == 1.0 {
                    t
                } else {
                    t.powf(l)
                };
                v.max(GROWTH_FLOOR)
            }
            Self::CanonicalPiecewise { c, gamma } => {
                let p = 1.0 / (1.0 + gamma);
                let junction = (GROWTH_FLOOR / c).powf(1.0 + gamma).exp();
                if t <= junction {
                    GROWTH_FLOOR
                } else {
                    log_branch(t, c, p)
                }
            }
        }
    }
}

#[inline]
fn log_branch(t: f64, c: f64, p: f64) -> f64 {
    if t <= 1.0 {
        return 0.0;
    }
    let lt = t.ln();
    if p == 1.0 {
        c * lt
    } else if p == 2.0 {
        c * lt * lt
    } else if p == 0.5 {
        c * lt.sqrt()
    } else {
        c * lt.powf(p)
    }
}

/// Cross-section of the domain `D_t = f(t) K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `(1, f(t))`; one dimension only.
    Interval,
    Ball { radius: f64 },
    /// A body described only through its inner and outer radii.
    StarBody { rad_minus: f64, rad_plus: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    dimension: usize,
    shape: Shape,
    growth: GrowthFunction,
}

impl DomainSpec {
    pub fn new(dimension: usize, shape: Shape, growth: GrowthFunction) -> Result<Self> {
        match shape {
            Shape::Interval if dimension != 1 => {
                return Err(Error::param("interval domains are one-dimensional"))
            }
            Shape::Ball { .. } | Shape::StarBody { .. } if dimension < 2 => {
                return Err(Error::param("ball and star-body domains need dimension >= 2"))
            }
            Shape::Ball { radius } if !(radius > 0.0 && radius.is_finite()) => {
                return Err(Error::param(format!("ball radius must be > 0, got {radius}")))
            }
            Shape::StarBody {
                rad_minus,
                rad_plus,
            } if !(rad_minus > 0.0 && rad_minus <= rad_plus && rad_plus.is_finite()) => {
                return Err(Error::param(format!(
                    "need 0 < rad_minus <= rad_plus, got {rad_minus}, {rad_plus}"
                )))
            }
            _ => {}
        }
        if dimension == 0 {
            return Err(Error::param("dimension must be >= 1"));
        }
        Ok(Self {
            dimension,
            shape,
            growth,
        })
    }

    pub fn interval(growth: GrowthFunction) -> Self {
        Self {
            dimension: 1,
            shape: Shape::Interval,
            growth,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn growth(&self) -> &GrowthFunction {
        &self.growth
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.shape, Shape::Ball { .. })
    }

    pub fn rad_plus(&self) -> f64 {
        match self.shape {
            Shape::Interval => 1.0,
            Shape::Ball { radius } => radius,
            Shape::StarBody { rad_plus, .. } => rad_plus,
        }
    }

    pub fn rad_minus(&self) -> f64 {
        match self.shape {
            Shape::Interval => 1.0,
            Shape::Ball { radius } => radius,
            Shape::StarBody { rad_minus, .. } => rad_minus,
        }
    }

    /// Outer edge of the domain at time `t`: `f(t)` for the interval, `radius * f(t)` for a ball.
    pub fn outer_edge(&self, t: f64) -> f64 {
        self.rad_plus() * self.growth.at(t)
    }
}

/// Power-law bounds on the radial drift component: `B^-(r) <= B^+(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBounds {
    b_plus: PowerDrift,
    b_minus: PowerDrift,
}

impl RadialBounds {
    /// Power laws are ordered on all of `[1, inf)` iff both the amplitude and
    /// the exponent are ordered.
    pub fn new(b_plus: PowerDrift, b_minus: PowerDrift) -> Result<Self> {
        if b_minus.b() > b_plus.b() || b_minus.gamma() > b_plus.gamma() {
            return Err(Error::param(
                "radial bounds need b_minus(r) <= b_plus(r) for all r >= 1",
            ));
        }
        Ok(Self { b_plus, b_minus })
    }

    /// Bounds for an exactly radial drift.
    pub fn radial(drift: PowerDrift) -> Self {
        Self {
            b_plus: drift,
            b_minus: drift,
        }
    }

    pub fn b_plus(&self) -> &PowerDrift {
        &self.b_plus
    }

    pub fn b_minus(&self) -> &PowerDrift {
        &self.b_minus
    }
}

pub fn eval_growth(f: &GrowthFunction, t: f64) -> Result<f64> {
    f.eval(t)
}

pub fn eval_drift(drift: &PowerDrift, x: f64) -> Result<f64> {
    drift.eval(x)
}

/// One-dimensional drift of `|X|` for a radial drift in dimension `d`:
/// `B(r) + (d - 1) / (2 r)`.
pub fn radial_reduced_drift(drift: &PowerDrift, dimension: usize, r: f64) -> Result<f64> {
    if dimension < 2 {
        return Err(Error::param("radial reduction needs dimension >= 2"));
    }
    Ok(drift.eval(r)? + (dimension as f64 - 1.0) / (2.0 * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn growth_examples() {
        let canon = GrowthFunction::canonical(2.0, 0.0).unwrap();
        assert_eq!(canon.eval(1.0).unwrap(), 2.0);
        let lp = GrowthFunction::log_power(1.0, 1.0).unwrap();
        assert!((lp.eval(3f64.exp()).unwrap() - 3.0).abs() < 1e-14);
        let pw = GrowthFunction::power(0.5).unwrap();
        assert_eq!(pw.eval(4.0).unwrap(), 2.0);
        assert!(pw.eval(-1.0).is_err());
    }

    #[test]
    fn power_growth_checked_against_drift() {
        let pw = GrowthFunction::power(3.0).unwrap();
        assert!(pw.eval_with_drift(2.0, -0.5).is_err());
        let ok = GrowthFunction::power(0.5).unwrap();
        assert!(ok.eval_with_drift(2.0, -0.5).is_ok());
        // no restriction once gamma >= 1
        assert!(pw.eval_with_drift(2.0, 1.0).is_ok());
    }

    #[test]
    fn canonical_is_continuous_at_junction() {
        for &(c, g) in &[(1.0, 0.0), (0.4, 0.0), (2.0, -0.5), (0.7, 0.8), (3.0, 0.0)] {
            let f = GrowthFunction::canonical(c, g).unwrap();
            let tj = f.junction_time().unwrap();
            let right = c * tj.ln().powf(1.0 / (1.0 + g));
            assert!((right - GROWTH_FLOOR).abs() <= 1e-12 * GROWTH_FLOOR, "{c} {g}");
            assert_eq!(f.at(tj), GROWTH_FLOOR);
        }
    }

    #[test]
    fn drift_examples() {
        let d = PowerDrift::new(1.0, 0.0).unwrap();
        assert_eq!(eval_drift(&d, 7.0).unwrap(), 1.0);
        let d = PowerDrift::new(2.0, 1.0).unwrap();
        assert_eq!(eval_drift(&d, 3.0).unwrap(), 6.0);
        let d = PowerDrift::new(1.0, -0.5).unwrap();
        assert_eq!(eval_drift(&d, 4.0).unwrap(), 0.5);
        assert!(matches!(d.eval(0.5), Err(Error::Domain(_))));
        assert!(PowerDrift::new(1.0, -1.0).is_err());
        assert!(PowerDrift::new(0.0, 0.5).is_err());
    }

    #[test]
    fn radial_drift_examples() {
        let d = PowerDrift::new(1.0, 0.0).unwrap();
        assert_eq!(radial_reduced_drift(&d, 3, 1.0).unwrap(), 2.0);
        assert_eq!(radial_reduced_drift(&d, 2, 2.0).unwrap(), 1.25);
        let d = PowerDrift::new(0.5, 1.0).unwrap();
        assert_eq!(radial_reduced_drift(&d, 3, 2.0).unwrap(), 1.5);
        assert!(radial_reduced_drift(&d, 1, 2.0).is_err());
    }

    #[test]
    fn domain_validation() {
        let f = GrowthFunction::constant(3.0).unwrap();
        assert!(DomainSpec::new(2, Shape::Interval, f).is_err());
        assert!(DomainSpec::new(1, Shape::Ball { radius: 1.0 }, f).is_err());
        assert!(DomainSpec::new(
            3,
            Shape::StarBody {
                rad_minus: 2.0,
                rad_plus: 1.0
            },
            f
        )
        .is_err());
        let ball = DomainSpec::new(3, Shape::Ball { radius: 0.5 }, f).unwrap();
        assert_eq!(ball.outer_edge(10.0), 1.5);
        assert_eq!(ball.rad_minus(), ball.rad_plus());
    }

    fn any_growth() -> impl Strategy<Value = GrowthFunction> {
        prop_oneof![
            (1.01f64..10.0).prop_map(|v| GrowthFunction::constant(v).unwrap()),
            (0.05f64..5.0, 0.1f64..3.0)
                .prop_map(|(c, p)| GrowthFunction::log_power(c, p).unwrap()),
            (0.05f64..2.0).prop_map(|l| GrowthFunction::power(l).unwrap()),
            (0.05f64..5.0, -0.95f64..3.0)
                .prop_map(|(c, g)| GrowthFunction::canonical(c, g).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn growth_is_nondecreasing_and_above_one(f in any_growth(), a in 0.0f64..1e6, b in 0.0f64..1e6) {
            let (s, t) = if a <= b { (a, b) } else { (b, a) };
            let fs = f.eval(s).unwrap();
            let ft = f.eval(t).unwrap();
            prop_assert!(fs <= ft);
            prop_assert!(fs > 1.0);
        }

        #[test]
        fn drift_monotone_in_x(b in 0.01f64..10.0, g in -0.99f64..3.0, x in 1.0f64..1e3, y in 1.0f64..1e3) {
            let d = PowerDrift::new(b, g).unwrap();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let (dl, dh) = (d.eval(lo).unwrap(), d.eval(hi).unwrap());
            if g >= 0.0 { prop_assert!(dl <= dh); }
            if g <= 0.0 { prop_assert!(dl >= dh); }
        }

        #[test]
        fn radial_correction_is_exact(b in 0.01f64..10.0, g in -0.99f64..3.0, d in 2usize..8, r in 1.0f64..100.0) {
            let drift = PowerDrift::new(b, g).unwrap();
            let diff = radial_reduced_drift(&drift, d, r).unwrap() - drift.eval(r).unwrap();
            let expect = (d as f64 - 1.0) / (2.0 * r);
            prop_assert!((diff - expect).abs() <= 1e-12 * (1.0 + drift.eval(r).unwrap()));
        }
    }
}
