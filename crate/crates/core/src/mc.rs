//! Ensembles of simulated paths and the estimators that turn them into
//! checks of the analytic results.
//!
//! Paths are simulated as an ordered parallel map over `path_id`; every
//! reduction runs sequentially over that order with pairwise summation, so a
//! fixed seed gives bit-identical estimates for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, Classification, Verdict};
use crate::error::{Error, Result};
use crate::model::{ConstantDrift, DomainSpec, GrowthFunction, PowerDrift, Shape};
use crate::sde::{
    self, BallMode, CrossingDetection, Drift, LeftBoundary, PathOutcome, ReflectionScheme,
    ReflectionSpec, RightBoundary, SamplingPlan, SimGrid,
};

/// Smallest ensemble accepted by the estimators.
pub const MIN_PATHS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub censored_fraction: f64,
}

impl Estimate {
    /// Sample mean and standard error of the mean.
    pub fn from_samples(values: &[f64], censored_fraction: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Estimation("no samples".into()));
        }
        let n = values.len();
        let mean = pairwise_sum(values) / n as f64;
        let std_error = if n > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&dev) / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            mean,
            std_error,
            n,
            censored_fraction,
        })
    }

    /// `(mean - reference) / std_error`; zero when both the error and the gap vanish.
    pub fn z_score(&self, reference: f64) -> f64 {
        let gap = self.mean - reference;
        if self.std_error == 0.0 {
            if gap == 0.0 {
                0.0
            } else {
                gap.signum() * f64::INFINITY
            }
        } else {
            gap / self.std_error
        }
    }
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Ensemble size, time step and randomness shared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSettings {
    pub n_paths: usize,
    pub dt: f64,
    /// Absolute end time of each path.
    pub horizon: f64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub scheme: ReflectionScheme,
    pub crossing: CrossingDetection,
}

impl EnsembleSettings {
    pub fn new(n_paths: usize, dt: f64, horizon: f64, seed: u64) -> Self {
        Self {
            n_paths,
            dt,
            horizon,
            seed,
            workers: Some(1),
            scheme: ReflectionScheme::default(),
            crossing: CrossingDetection::default(),
        }
    }

    pub fn grid(&self, t_start: f64) -> SimGrid {
        SimGrid::new(self.dt, t_start, self.horizon, self.seed)
            .with_scheme(self.scheme, self.crossing)
    }
}

/// Simulate `n` paths, `simulate(path_id)` each, returned in path order.
pub fn run_paths<F>(n: usize, workers: Option<usize>, simulate: F) -> Result<Vec<PathOutcome>>
where
    F: Fn(u64) -> Result<PathOutcome> + Sync + Send,
{
    match workers {
        Some(1) => (0..n as u64).map(&simulate).collect(),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::param(format!("worker pool: {e}")))?;
            pool.install(|| (0..n as u64).into_par_iter().map(&simulate).collect())
        }
        None => (0..n as u64).into_par_iter().map(&simulate).collect(),
    }
}

fn censored_fraction(outcomes: &[PathOutcome]) -> f64 {
    outcomes.iter().filter(|o| o.censored).count() as f64 / outcomes.len().max(1) as f64
}

/// Binomial estimate of `P(event)`. Censored paths stay in the denominator.
pub fn estimate_probability<E>(outcomes: &[PathOutcome], event: E) -> Result<Estimate>
where
    E: Fn(&PathOutcome) -> bool,
{
    let n = outcomes.len();
    if n < MIN_PATHS {
        return Err(Error::Estimation(format!(
            "probability estimate needs at least {MIN_PATHS} paths, got {n}"
        )));
    }
    let censored = censored_fraction(outcomes);
    if censored == 1.0 {
        return Err(Error::Estimation("every path was censored".into()));
    }
    let hits = outcomes.iter().filter(|o| event(o)).count();
    let p = hits as f64 / n as f64;
    Ok(Estimate {
        mean: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        n,
        censored_fraction: censored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// `E exp(lambda T)`.
    Mgf,
    /// `E exp(-lambda T)`.
    Laplace,
}

/// Sample mean of `exp(+-lambda T)` over first-hit times. Censored paths are
/// refused: their unobserved tail would bias the estimate.
pub fn estimate_transform(
    outcomes: &[PathOutcome],
    transform: Transform,
    lambda: f64,
    validity_bound: Option<f64>,
) -> Result<Estimate> {
    if outcomes.is_empty() {
        return Err(Error::Estimation("no paths".into()));
    }
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::Estimation(format!("lambda must be >= 0, got {lambda}")));
    }
    if let Some(bound) = validity_bound {
        if lambda > bound {
            return Err(Error::Estimation(format!(
                "lambda = {lambda} exceeds the validity bound {bound}"
            )));
        }
    }
    let censored = outcomes.iter().filter(|o| o.censored).count();
    if censored > 0 {
        return Err(Error::Estimation(format!(
            "{censored} of {} paths censored; extend the horizon",
            outcomes.len()
        )));
    }
    if lambda == 0.0 {
        return Ok(Estimate {
            mean: 1.0,
            std_error: 0.0,
            n: outcomes.len(),
            censored_fraction: 0.0,
        });
    }
    let sign = match transform {
        Transform::Mgf => 1.0,
        Transform::Laplace => -1.0,
    };
    let values = outcomes
        .iter()
        .map(|o| {
            o.first_hit_time()
                .map(|t| (sign * lambda * t).exp())
                .ok_or_else(|| Error::Estimation(format!("path {} has no hit", o.path_id)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Estimate::from_samples(&values, 0.0)
}

/// An estimate next to the analytic value it is meant to reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub label: String,
    pub analytic: f64,
    pub estimate: Estimate,
    pub z_score: f64,
}

impl OracleCheck {
    pub fn new(label: impl Into<String>, analytic: f64, estimate: Estimate) -> Self {
        Self {
            label: label.into(),
            analytic,
            z_score: estimate.z_score(analytic),
            estimate,
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score.abs() <= sigmas
    }
}

/// `E_x exp(D^2/2 T_beta)` for constant drift reflected at 1, simulated and exact.
pub fn mgf_check(
    drift: ConstantDrift,
    x: f64,
    beta: f64,
    settings: &EnsembleSettings,
) -> Result<OracleCheck> {
    let exact = analytic::prop2_mgf(&drift, x, beta)?;
    let lambda = drift.value().powi(2) / 2.0;
    let refl = ReflectionSpec::new(LeftBoundary::Reflect(1.0), RightBoundary::None);
    let d = Drift::constant(drift);
    let grid = settings.grid(0.0);
    let paths = run_paths(settings.n_paths, settings.workers, |id| {
        sde::sample_hitting_time(x, &[beta], &d, &refl, &grid.with_path(id))
    })?;
    let est = estimate_transform(&paths, Transform::Mgf, lambda, Some(lambda))?;
    Ok(OracleCheck::new("mgf", exact.value, est))
}

/// `E_beta exp(-lambda T_alpha)` for constant drift reflected at `beta`.
pub fn laplace_check(
    drift: ConstantDrift,
    lambda: f64,
    alpha: f64,
    beta: f64,
    settings: &EnsembleSettings,
) -> Result<OracleCheck> {
    let exact = analytic::prop3_laplace(&drift, lambda, alpha, beta)?;
    let refl = ReflectionSpec::new(LeftBoundary::None, RightBoundary::Reflect { at: beta });
    let d = Drift::constant(drift);
    let grid = settings.grid(0.0);
    let paths = run_paths(settings.n_paths, settings.workers, |id| {
        sde::sample_hitting_time(beta, &[alpha], &d, &refl, &grid.with_path(id))
    })?;
    let est = estimate_transform(&paths, Transform::Laplace, lambda, None)?;
    Ok(OracleCheck::new("laplace", exact.value, est))
}

/// Monte Carlo value of a transform that is bounded above by 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub label: String,
    pub lambda: f64,
    pub bound: f64,
    pub estimate: Estimate,
}

impl BoundCheck {
    /// `estimate <= bound + sigmas * SE`.
    pub fn holds(&self, sigmas: f64) -> bool {
        self.estimate.mean <= self.bound + sigmas * self.estimate.std_error
    }
}

/// `E_x exp(lambda_hat T_alpha)` for the process on `[1, beta]` reflected at
/// `beta` and stopped at 1.
pub fn lambda_hat_check(
    drift: PowerDrift,
    alpha: f64,
    beta: f64,
    x: f64,
    settings: &EnsembleSettings,
) -> Result<BoundCheck> {
    if !(alpha <= x && x <= beta) {
        return Err(Error::domain("start must lie in [alpha, beta]"));
    }
    let lambda = analytic::prop1_lambda_hat(&drift, alpha, beta)?;
    let left = if alpha > 1.0 {
        LeftBoundary::Absorb(1.0)
    } else {
        LeftBoundary::None
    };
    let refl = ReflectionSpec::new(left, RightBoundary::Reflect { at: beta });
    let d = Drift::power(drift);
    let grid = settings.grid(0.0);
    let paths = run_paths(settings.n_paths, settings.workers, |id| {
        sde::sample_hitting_time(x, &[alpha], &d, &refl, &grid.with_path(id))
    })?;
    Ok(BoundCheck {
        label: "lambda_hat".into(),
        lambda,
        bound: 2.0,
        estimate: estimate_transform(&paths, Transform::Mgf, lambda, Some(lambda))?,
    })
}

/// `E_x exp(lambda_bar tau_beta)` for the process reflected at `alpha`.
pub fn lambda_bar_check(
    drift: PowerDrift,
    alpha: f64,
    beta: f64,
    x: f64,
    settings: &EnsembleSettings,
) -> Result<BoundCheck> {
    if !(alpha <= x && x <= beta) {
        return Err(Error::domain("start must lie in [alpha, beta]"));
    }
    let lambda = analytic::prop4_lambda_bar(&drift, alpha, beta)?;
    let refl = ReflectionSpec::new(LeftBoundary::Reflect(alpha), RightBoundary::None);
    let d = Drift::power(drift);
    let grid = settings.grid(0.0);
    let paths = run_paths(settings.n_paths, settings.workers, |id| {
        sde::sample_hitting_time(x, &[beta], &d, &refl, &grid.with_path(id))
    })?;
    Ok(BoundCheck {
        label: "lambda_bar".into(),
        lambda,
        bound: 2.0,
        estimate: estimate_transform(&paths, Transform::Mgf, lambda, Some(lambda))?,
    })
}

/// Frequency of reaching `beta` before `alpha` from `x` with no barrier active.
pub fn exit_probability(
    drift: &Drift,
    alpha: f64,
    x: f64,
    beta: f64,
    grid: &SimGrid,
    n_paths: usize,
    workers: Option<usize>,
) -> Result<Estimate> {
    let refl = ReflectionSpec::new(LeftBoundary::None, RightBoundary::None);
    let paths = run_paths(n_paths, workers, |id| {
        sde::sample_hitting_time(x, &[alpha, beta], drift, &refl, &grid.with_path(id))
    })?;
    estimate_probability(&paths, |o| o.first_hit_level() == Some(beta))
}

/// Exit-probability check at step `dt` and at `dt / 2` on the same Brownian paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingCheck {
    pub coarse: OracleCheck,
    pub fine: OracleCheck,
    /// `|fine - coarse|` in units of the coarse standard error.
    pub halving_shift: f64,
}

pub fn hitting_check(
    drift: PowerDrift,
    alpha: f64,
    x: f64,
    beta: f64,
    settings: &EnsembleSettings,
) -> Result<HittingCheck> {
    let exact = analytic::hitting_prob_up(&drift, alpha, x, beta, None)?.value;
    let d = Drift::power(drift);
    let mut coarse_grid = settings.grid(0.0);
    coarse_grid.merge = 2;
    let fine_grid = coarse_grid.refined()?;
    let coarse = exit_probability(&d, alpha, x, beta, &coarse_grid, settings.n_paths, settings.workers)?;
    let fine = exit_probability(&d, alpha, x, beta, &fine_grid, settings.n_paths, settings.workers)?;
    Ok(HittingCheck {
        halving_shift: (fine.mean - coarse.mean).abs() / coarse.std_error,
        coarse: OracleCheck::new("exit_probability_dt", exact, coarse),
        fine: OracleCheck::new("exit_probability_dt_half", exact, fine),
    })
}

/// Summary of ratio tracks over a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub window: (f64, f64),
    /// Per-path minimum of the sampled `X/f` in the window.
    pub min_ratio: Estimate,
    pub max_ratio: Estimate,
    /// Per-path minimum of `X/f` over every grid point between samples in
    /// the window; never above `min_ratio`.
    pub grid_min_ratio: Estimate,
    /// Time-average of sampled `X/f` over the window.
    pub mean_ratio: Estimate,
    pub deviation_slope: Estimate,
    /// Returns to the left barrier per log-time unit.
    pub return_count: Estimate,
    /// For each candidate `q`, the largest sampled `(f - X) / t^q` in the window.
    pub scaled_deviation: Vec<(f64, Estimate)>,
    pub per_path_min_ratio: Vec<f64>,
    pub per_path_slope: Vec<f64>,
}

/// Least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = pairwise_sum(x) / n as f64;
    let my = pairwise_sum(y) / n as f64;
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    let den = pairwise_sum(&sxx);
    (den > 0.0).then(|| pairwise_sum(&sxy) / den)
}

/// Aggregate ratio tracks over `window`. Extremes are taken over the samples
/// in the window; the deviation slope is fitted on the later half of the
/// window in log time.
pub fn growth_report(
    outcomes: &[PathOutcome],
    window: (f64, f64),
    q_candidates: &[f64],
) -> Result<GrowthReport> {
    let (t_lo, t_hi) = window;
    if !(t_lo > 0.0 && t_hi > t_lo) {
        return Err(Error::domain(format!("bad window [{t_lo}, {t_hi}]")));
    }
    if outcomes.is_empty() {
        return Err(Error::Estimation("no paths".into()));
    }
    let t_mid = (t_lo * t_hi).sqrt();
    let (mut mins, mut maxs, mut means, mut slopes, mut returns) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut grid_mins = Vec::new();
    let mut scaled: Vec<Vec<f64>> = vec![Vec::new(); q_candidates.len()];
    for o in outcomes {
        let track = o.ratio_track.as_deref().ok_or_else(|| {
            Error::domain(format!("path {} has no ratio track", o.path_id))
        })?;
        let (first, last) = match (track.first(), track.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => return Err(Error::domain("empty ratio track")),
        };
        if t_lo < first || t_hi > last * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "window [{t_lo}, {t_hi}] outside recorded range [{first}, {last}]"
            )));
        }
        let inside: Vec<_> = track.iter().filter(|s| s.t >= t_lo && s.t <= t_hi).collect();
        if inside.len() < 2 {
            return Err(Error::domain("window holds fewer than two samples"));
        }
        let lo = inside.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
        let hi = inside.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
        let grid_lo = track
            .windows(2)
            .filter(|w| w[0].t >= t_lo && w[1].t <= t_hi)
            .map(|w| w[1].min_ratio)
            .fold(lo, f64::min);
        grid_mins.push(grid_lo);
        mins.push(lo);
        maxs.push(hi);
        let r: Vec<f64> = inside.iter().map(|s| s.ratio).collect();
        means.push(pairwise_sum(&r) / r.len() as f64);

        let (lx, ly): (Vec<f64>, Vec<f64>) = inside
            .iter()
            .filter(|s| s.t >= t_mid && s.deviation > 0.0)
            .map(|s| (s.t.ln(), s.deviation.ln()))
            .unzip();
        if let Some(s) = ls_slope(&lx, &ly) {
            slopes.push(s);
        }

        for (k, &q) in q_candidates.iter().enumerate() {
            let m = inside
                .iter()
                .map(|s| s.deviation / s.t.powf(q))
                .fold(f64::NEG_INFINITY, f64::max);
            scaled[k].push(m);
        }

        let j_lo = t_lo.ln().floor().max(0.0) as usize;
        let j_hi = (t_hi.ln().ceil() as usize).max(j_lo + 1);
        let total: u64 = (j_lo..j_hi).map(|j| o.returns_in_decade(j)).sum();
        returns.push(total as f64 / (j_hi - j_lo) as f64);
    }
    let censored = censored_fraction(outcomes);
    Ok(GrowthReport {
        window,
        min_ratio: Estimate::from_samples(&mins, censored)?,
        max_ratio: Estimate::from_samples(&maxs, censored)?,
        grid_min_ratio: Estimate::from_samples(&grid_mins, censored)?,
        mean_ratio: Estimate::from_samples(&means, censored)?,
        deviation_slope: Estimate::from_samples(&slopes, censored)
            .map_err(|_| Error::Estimation("no path had enough deviation samples".into()))?,
        return_count: Estimate::from_samples(&returns, censored)?,
        scaled_deviation: q_candidates
            .iter()
            .zip(&scaled)
            .map(|(&q, v)| Ok((q, Estimate::from_samples(v, censored)?)))
            .collect::<Result<_>>()?,
        per_path_min_ratio: mins,
        per_path_slope: slopes,
    })
}

/// Moving-domain ensemble started at `x = 1`, `t = 0`.
pub fn moving_domain_ensemble(
    drift: PowerDrift,
    f: GrowthFunction,
    settings: &EnsembleSettings,
    plan: SamplingPlan,
) -> Result<Vec<PathOutcome>> {
    f.check_against_drift(drift.gamma())?;
    let d = Drift::power(drift);
    let grid = settings.grid(0.0);
    run_paths(settings.n_paths, settings.workers, |id| {
        sde::simulate_moving_domain(1.0, &d, &f, &grid.with_path(id), plan)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub horizon_exponent: u32,
    pub empirical: Classification,
    pub analytic: Verdict,
    /// `returns[path][j]`: returns to 1 during `[e^j, e^(j+1))`.
    pub returns: Vec<Vec<u64>>,
    /// Fraction of paths with a return in each of the last two decades.
    pub returning_fraction: f64,
    /// Fraction of paths with no return in either of the last two decades.
    pub silent_fraction: f64,
    /// Fraction of paths whose decade minimum stays above the re-arm level
    /// and grows from the second-to-last to the last decade.
    pub escaping_fraction: f64,
}

impl DichotomyReport {
    pub fn agrees(&self) -> bool {
        self.empirical == self.analytic.classification
    }
}

/// Simulate the canonical process to `t = e^J` and read off recurrence from
/// the returns to 1 in the last two decades.
pub fn dichotomy_experiment(
    drift: PowerDrift,
    c: f64,
    horizon_exponent: u32,
    settings: &EnsembleSettings,
) -> Result<DichotomyReport> {
    if horizon_exponent < 2 {
        return Err(Error::param("horizon exponent must be >= 2"));
    }
    let analytic = analytic::classify_1d(&drift, c)?;
    let f = GrowthFunction::canonical(c, drift.gamma())?;
    let mut s = *settings;
    s.horizon = (horizon_exponent as f64).exp();
    let plan = SamplingPlan::default();
    let paths = moving_domain_ensemble(drift, f, &s, plan)?;
    let j = horizon_exponent as usize;
    let (a, b) = (j - 2, j - 1);
    let n = paths.len() as f64;
    let returning = paths
        .iter()
        .filter(|p| p.returns_in_decade(a) > 0 && p.returns_in_decade(b) > 0)
        .count() as f64
        / n;
    let silent = paths
        .iter()
        .filter(|p| p.returns_in_decade(a) == 0 && p.returns_in_decade(b) == 0)
        .count() as f64
        / n;
    let floor = 1.0 + plan.return_rearm;
    let escaping = paths
        .iter()
        .filter(|p| match (p.decades.get(a), p.decades.get(b)) {
            (Some(da), Some(db)) => da.min_state > floor && db.min_state > da.min_state,
            _ => false,
        })
        .count() as f64
        / n;
    let empirical = if returning > 0.5 {
        Classification::Recurrent
    } else if escaping > 0.5 {
        Classification::Transient
    } else {
        Classification::Undetermined
    };
    Ok(DichotomyReport {
        horizon_exponent,
        empirical,
        analytic,
        returns: paths
            .iter()
            .map(|p| (0..j).map(|k| p.returns_in_decade(k)).collect())
            .collect(),
        returning_fraction: returning,
        silent_fraction: silent,
        escaping_fraction: escaping,
    })
}

/// Mean time to reach 1 from `start` at time `t_start` in the canonical
/// moving domain, over paths that return before the horizon.
pub fn first_return_time(
    drift: PowerDrift,
    c: f64,
    start: f64,
    t_start: f64,
    settings: &EnsembleSettings,
) -> Result<Estimate> {
    let f = GrowthFunction::canonical(c, drift.gamma())?;
    let refl = ReflectionSpec::moving_interval(f);
    let d = Drift::power(drift);
    let grid = settings.grid(t_start);
    let paths = run_paths(settings.n_paths, settings.workers, |id| {
        sde::sample_hitting_time(start, &[1.0], &d, &refl, &grid.with_path(id))
    })?;
    let times: Vec<f64> = paths.iter().filter_map(|p| p.first_hit_time()).collect();
    if times.is_empty() {
        return Err(Error::Estimation("no path returned before the horizon".into()));
    }
    Estimate::from_samples(&times, censored_fraction(&paths))
}

/// `P(|X| reaches beta before alpha)` for `d`-dimensional Brownian motion,
/// from the radial scale function `r^(2-d)` (`ln r` in two dimensions).
pub fn bessel_exit_probability(dimension: usize, alpha: f64, x: f64, beta: f64) -> f64 {
    let s = |r: f64| {
        if dimension == 2 {
            r.ln()
        } else {
            -r.powf(2.0 - dimension as f64)
        }
    };
    (s(x) - s(alpha)) / (s(beta) - s(alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCheck {
    pub dimension: usize,
    pub radial: OracleCheck,
    pub full: OracleCheck,
    /// `(radial - full) / sqrt(SE_r^2 + SE_f^2)`.
    pub mode_z: f64,
}

/// Exit probability from the annulus `alpha < |x| < beta` in a ball of fixed
/// radius `outer`, simulated radially and in full dimension.
pub fn ball_check(
    dimension: usize,
    b_field: Option<PowerDrift>,
    alpha: f64,
    x: f64,
    beta: f64,
    outer: f64,
    settings: &EnsembleSettings,
) -> Result<BallCheck> {
    if !(1.0 <= alpha && alpha < x && x < beta && beta <= outer) {
        return Err(Error::domain("need 1 <= alpha < x < beta <= outer"));
    }
    let domain = DomainSpec::new(
        dimension,
        Shape::Ball { radius: 1.0 },
        GrowthFunction::constant(outer)?,
    )?;
    let exact = match b_field {
        None => bessel_exit_probability(dimension, alpha, x, beta),
        Some(b) => analytic::hitting_prob_up(&b, alpha, x, beta, Some(dimension))?.value,
    };
    let mut start = vec![0.0; dimension];
    start[0] = x;
    let grid = settings.grid(0.0);
    let mut estimates = Vec::with_capacity(2);
    for mode in [BallMode::Radial, BallMode::Full] {
        let paths = run_paths(settings.n_paths, settings.workers, |id| {
            sde::simulate_ball(&start, b_field, &domain, &grid.with_path(id), &[alpha, beta], mode)
        })?;
        estimates.push(estimate_probability(&paths, |o| {
            o.first_hit_level() == Some(beta)
        })?);
    }
    let (r, f) = (estimates[0], estimates[1]);
    Ok(BallCheck {
        dimension,
        mode_z: (r.mean - f.mean) / (r.std_error.powi(2) + f.std_error.powi(2)).sqrt(),
        radial: OracleCheck::new("radial", exact, r),
        full: OracleCheck::new("full", exact, f),
    })
}

/// Kolmogorov-Smirnov distance of a sample from the uniform law on `[lo, hi]`.
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut v: Vec<f64> = samples.iter().map(|x| (x - lo) / (hi - lo)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &u)| ((i as f64 + 1.0) / n - u).max(u - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Terminal states of zero-drift paths reflected in `[0, 1]`, started at 1/2.
pub fn reflected_uniform_states(settings: &EnsembleSettings) -> Result<Vec<f64>> {
    let refl = ReflectionSpec::new(LeftBoundary::Reflect(0.0), RightBoundary::Reflect { at: 1.0 });
    let grid = settings.grid(0.0);
    let paths = run_paths(settings.n_paths, settings.workers, |id| {
        sde::simulate_reflected(0.5, &Drift::Zero, &refl, &grid.with_path(id))
    })?;
    Ok(paths.iter().map(|p| p.terminal_state).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::Hit;

    fn outcome(id: u64, hit: Option<f64>) -> PathOutcome {
        PathOutcome {
            path_id: id,
            start_time: 0.0,
            terminal_time: hit.unwrap_or(10.0),
            terminal_state: 1.0,
            terminal_position: None,
            hit_record: hit
                .map(|t| vec![Hit { level: 2.0, time: t }])
                .unwrap_or_default(),
            censored: hit.is_none(),
            boundary_contact_count: 0,
            left_contact_count: 0,
            flagged_steps: 0,
            ratio_track: None,
            decades: Vec::new(),
        }
    }

    #[test]
    fn probability_of_sure_event() {
        let paths: Vec<_> = (0..200).map(|i| outcome(i, Some(1.0))).collect();
        let e = estimate_probability(&paths, |_| true).unwrap();
        assert_eq!((e.mean, e.std_error, e.n), (1.0, 0.0, 200));
    }

    #[test]
    fn probability_needs_paths() {
        assert!(estimate_probability(&[], |_| true).is_err());
        let all_censored: Vec<_> = (0..200).map(|i| outcome(i, None)).collect();
        assert!(estimate_probability(&all_censored, |_| false).is_err());
    }

    #[test]
    fn censored_paths_stay_in_denominator() {
        let mut paths: Vec<_> = (0..150).map(|i| outcome(i, Some(1.0))).collect();
        paths.extend((150..200).map(|i| outcome(i, None)));
        let e = estimate_probability(&paths, |o| !o.censored).unwrap();
        assert_eq!(e.mean, 0.75);
        assert_eq!(e.censored_fraction, 0.25);
    }

    #[test]
    fn transform_at_zero_is_one() {
        let paths: Vec<_> = (0..10).map(|i| outcome(i, Some(0.1 * i as f64))).collect();
        let e = estimate_transform(&paths, Transform::Mgf, 0.0, None).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
    }

    #[test]
    fn transform_refuses_censoring_and_excess_rate() {
        let mut paths: Vec<_> = (0..10).map(|i| outcome(i, Some(1.0))).collect();
        assert!(estimate_transform(&paths, Transform::Mgf, 0.6, Some(0.5)).is_err());
        paths.push(outcome(10, None));
        assert!(estimate_transform(&paths, Transform::Mgf, 0.5, None).is_err());
        assert!(estimate_transform(&paths, Transform::Laplace, 0.5, None).is_err());
    }

    #[test]
    fn transform_values() {
        let paths: Vec<_> = (0..4).map(|i| outcome(i, Some(i as f64))).collect();
        let e = estimate_transform(&paths, Transform::Laplace, 1.0, None).unwrap();
        let expect = (0..4).map(|i| (-(i as f64)).exp()).sum::<f64>() / 4.0;
        assert!((e.mean - expect).abs() < 1e-15);
    }

    #[test]
    fn estimators_ignore_path_order() {
        let mut paths: Vec<_> = (0..300).map(|i| outcome(i, Some((i % 17) as f64 * 0.1))).collect();
        let a = estimate_transform(&paths, Transform::Laplace, 0.7, None).unwrap();
        let pa = estimate_probability(&paths, |o| o.first_hit_time().unwrap() > 0.5).unwrap();
        paths.reverse();
        let b = estimate_transform(&paths, Transform::Laplace, 0.7, None).unwrap();
        let pb = estimate_probability(&paths, |o| o.first_hit_time().unwrap() > 0.5).unwrap();
        assert!((a.mean - b.mean).abs() < 1e-14 && (a.std_error - b.std_error).abs() < 1e-14);
        assert_eq!(pa, pb);
    }

    #[test]
    fn median_and_slope() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((ls_slope(&x, &y).unwrap() - 2.0).abs() < 1e-15);
        assert!(ls_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn ks_of_perfect_grid() {
        let n = 1000;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_uniform(&v, 0.0, 1.0) - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn bessel_probability_three_dimensions() {
        let p = bessel_exit_probability(3, 1.0, 1.5, 2.0);
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn growth_report_rejects_window_outside_track() {
        let drift = PowerDrift::new(1.0, 0.0).unwrap();
        let f = GrowthFunction::canonical(1.0, 0.0).unwrap();
        let s = EnsembleSettings::new(4, 1e-2, 100.0, 3);
        let paths = moving_domain_ensemble(drift, f, &s, SamplingPlan::default()).unwrap();
        assert!(matches!(
            growth_report(&paths, (10.0, 1000.0), &[]),
            Err(Error::Domain(_))
        ));
        let r = growth_report(&paths, (10.0, 100.0), &[0.0, 0.5]).unwrap();
        assert!(r.min_ratio.mean <= r.max_ratio.mean);
        assert!(r.max_ratio.mean <= 1.0);
        assert_eq!(r.scaled_deviation.len(), 2);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let drift = PowerDrift::new(1.0, 0.0).unwrap();
        let f = GrowthFunction::canonical(1.0, 0.0).unwrap();
        let mut s = EnsembleSettings::new(8, 1e-2, 50.0, 3);
        let a = moving_domain_ensemble(drift, f, &s, SamplingPlan::default()).unwrap();
        s.workers = Some(3);
        let b = moving_domain_ensemble(drift, f, &s, SamplingPlan::default()).unwrap();
        assert_eq!(a, b);
    }
}
