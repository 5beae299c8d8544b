//! Small-ensemble statistical checks of the simulator against exact values.
//! Tolerances are 4 standard errors so a correct implementation fails with
//! probability below 1e-4 per check.

use growdiff::analytic;
use growdiff::mc::{self, EnsembleSettings};
use growdiff::model::{ConstantDrift, PowerDrift};
use growdiff::sde::{self, CrossingDetection, Drift, LeftBoundary, ReflectionScheme, ReflectionSpec, RightBoundary, SimGrid};

#[test]
fn mgf_small_ensemble() {
    let s = EnsembleSettings::new(5_000, 1e-4, 200.0, 101);
    let c = mc::mgf_check(ConstantDrift::new(1.0).unwrap(), 1.0, 2.0, &s).unwrap();
    assert!(c.within(4.0), "{c:?}");
}

#[test]
fn laplace_small_ensemble() {
    let s = EnsembleSettings::new(5_000, 1e-4, 200.0, 102);
    let c = mc::laplace_check(ConstantDrift::new(1.0).unwrap(), 1.0, 1.0, 2.0, &s).unwrap();
    assert!(c.within(4.0), "{c:?}");
}

#[test]
fn exit_probability_with_power_drift() {
    let d = PowerDrift::new(0.7, 0.5).unwrap();
    let exact = analytic::hitting_prob_up(&d, 1.0, 1.4, 2.2, None).unwrap().value;
    let grid = SimGrid::new(1e-4, 0.0, 100.0, 103);
    let e = mc::exit_probability(&Drift::power(d), 1.0, 1.4, 2.2, &grid, 4_000, Some(1)).unwrap();
    assert!(e.z_score(exact).abs() <= 4.0, "{e:?} vs {exact}");
}

#[test]
fn mirror_fold_with_grid_detection_still_converges() {
    // first-order scheme: a looser step keeps the check fast, bias stays below 4 SE at this size
    let d = PowerDrift::new(1.0, 0.0).unwrap();
    let exact = analytic::hitting_prob_up(&d, 1.0, 1.5, 2.0, None).unwrap().value;
    let grid = SimGrid::new(2e-5, 0.0, 100.0, 104).with_scheme(ReflectionScheme::MirrorFold, CrossingDetection::Grid);
    let e = mc::exit_probability(&Drift::power(d), 1.0, 1.5, 2.0, &grid, 2_000, Some(1)).unwrap();
    assert!(e.z_score(exact).abs() <= 4.0, "{e:?} vs {exact}");
}

#[test]
fn rate_bounds_hold_on_small_ensembles() {
    let s = EnsembleSettings::new(2_000, 1e-4, 200.0, 105);
    let d = PowerDrift::new(1.0, 0.0).unwrap();
    assert!(mc::lambda_hat_check(d, 1.0, 2.0, 2.0, &s).unwrap().holds(3.0));
    assert!(mc::lambda_bar_check(d, 1.0, 2.0, 1.0, &s).unwrap().holds(3.0));
}

#[test]
fn reflected_motion_in_unit_interval_is_uniform() {
    let s = EnsembleSettings::new(2_000, 1e-3, 2.0, 106);
    let states = mc::reflected_uniform_states(&s).unwrap();
    assert!(states.iter().all(|x| (0.0..=1.0).contains(x)));
    // 1.63 / sqrt(n) is the 1% critical value
    assert!(mc::ks_uniform(&states, 0.0, 1.0) <= 1.63 / (2_000f64).sqrt());
}

#[test]
fn reflected_constant_drift_has_exponential_stationary_law() {
    // drift -D on [0, inf) reflected at 0: stationary density 2D exp(-2D x)
    let d = 1.5;
    let refl = ReflectionSpec::new(LeftBoundary::Reflect(0.0), RightBoundary::None);
    let drift = Drift::Constant { value: -d };
    let grid = SimGrid::new(1e-3, 0.0, 6.0, 107);
    let states: Vec<f64> = mc::run_paths(2_000, Some(1), |id| sde::simulate_reflected(0.5, &drift, &refl, &grid.with_path(id)))
        .unwrap()
        .iter()
        .map(|p| 1.0 - (-2.0 * d * p.terminal_state).exp())
        .collect();
    assert!(mc::ks_uniform(&states, 0.0, 1.0) <= 1.63 / (2_000f64).sqrt());
}

#[test]
fn ball_modes_agree_with_bessel_formula() {
    let s = EnsembleSettings::new(3_000, 1e-4, 100.0, 108);
    let c = mc::ball_check(3, None, 1.0, 1.5, 2.0, 2.5, &s).unwrap();
    assert!((c.radial.analytic - 2.0 / 3.0).abs() < 1e-15);
    assert!(c.radial.within(4.0), "{:?}", c.radial);
    assert!(c.full.within(4.0), "{:?}", c.full);
    assert!(c.mode_z.abs() <= 4.0);
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let mut s = EnsembleSettings::new(300, 1e-3, 50.0, 109);
    let a = mc::mgf_check(ConstantDrift::new(1.0).unwrap(), 1.0, 2.0, &s).unwrap();
    s.workers = Some(4);
    let b = mc::mgf_check(ConstantDrift::new(1.0).unwrap(), 1.0, 2.0, &s).unwrap();
    s.workers = None;
    let c = mc::mgf_check(ConstantDrift::new(1.0).unwrap(), 1.0, 2.0, &s).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn first_return_time_is_finite_in_the_recurrent_regime() {
    let d = PowerDrift::new(1.0, 0.0).unwrap();
    let s = EnsembleSettings::new(200, 1e-3, 60.0, 110);
    // f(t) = 0.4 log t passes 2 at t = e^5
    let t0 = 5f64.exp();
    let mut s1 = s;
    s1.horizon = t0 + 30.0;
    let e1 = mc::first_return_time(d, 0.4, 2.0, t0, &s1).unwrap();
    assert_eq!(e1.censored_fraction, 0.0);
    let mut s2 = s;
    s2.horizon = t0 + 60.0;
    let e2 = mc::first_return_time(d, 0.4, 2.0, t0, &s2).unwrap();
    assert!((e1.mean - e2.mean).abs() <= 4.0 * e1.std_error.max(1e-12), "{e1:?} {e2:?}");
}
