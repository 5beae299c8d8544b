//! Path simulation: explicit Euler steps with reflection at fixed and moving
//! barriers, first-passage detection, and the ball case (radially reduced or
//! in full dimension).
//!
//! Each path owns two ChaCha8 streams derived from `(seed, path_id)`: one for
//! the Gaussian increments and one for the auxiliary uniforms used by the
//! Brownian-bridge corrections. A path is therefore a pure function of its
//! parameters, its grid and its id.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstantDrift, DomainSpec, GrowthFunction, PowerDrift, Shape};

/// Bridge corrections are skipped once `2 (L - x)(L - y) / dt` exceeds this,
/// i.e. once the crossing probability is below `e^-40`.
const BRIDGE_CUTOFF: f64 = 40.0;
const MAX_FOLDS: u32 = 64;

/// Drift of the one-dimensional state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    Zero,
    Constant { value: f64 },
    Power { drift: PowerDrift },
    /// Radial part of `base(|x|) x/|x|` in `dimension` dimensions:
    /// `base(r) + (dimension - 1) / (2 r)`.
    Radial {
        base: Option<PowerDrift>,
        dimension: usize,
    },
}

impl Drift {
    pub fn power(drift: PowerDrift) -> Self {
        Self::Power { drift }
    }

    pub fn constant(drift: ConstantDrift) -> Self {
        Self::Constant {
            value: drift.value(),
        }
    }

    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant { value } => *value,
            Self::Power { drift } => drift.at(x),
            Self::Radial { base, dimension } => {
                let r = x.max(1.0);
                base.map_or(0.0, |b| b.at(r)) + (*dimension as f64 - 1.0) / (2.0 * r)
            }
        }
    }

    pub fn is_explosive(&self) -> bool {
        match self {
            Self::Power { drift } => drift.gamma() > 1.0,
            Self::Radial {
                base: Some(drift), ..
            } => drift.gamma() > 1.0,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "at", rename_all = "snake_case")]
pub enum LeftBoundary {
    None,
    Reflect(f64),
    Absorb(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RightBoundary {
    None,
    Reflect { at: f64 },
    Absorb { at: f64 },
    /// Reflection at `scale * f(t)`.
    Moving { f: GrowthFunction, scale: f64 },
}

impl RightBoundary {
    pub fn moving(f: GrowthFunction) -> Self {
        Self::Moving { f, scale: 1.0 }
    }

    #[inline]
    fn reflect_level(&self, t: f64) -> Option<f64> {
        match self {
            Self::Reflect { at } => Some(*at),
            Self::Moving { f, scale } => Some(scale * f.at(t)),
            _ => None,
        }
    }

    fn level(&self, t: f64) -> Option<f64> {
        match self {
            Self::Absorb { at } => Some(*at),
            other => other.reflect_level(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSpec {
    pub left: LeftBoundary,
    pub right: RightBoundary,
}

impl ReflectionSpec {
    pub fn new(left: LeftBoundary, right: RightBoundary) -> Self {
        Self { left, right }
    }

    /// `[1, f(t)]` with reflection at both ends.
    pub fn moving_interval(f: GrowthFunction) -> Self {
        Self::new(LeftBoundary::Reflect(1.0), RightBoundary::moving(f))
    }

    fn left_level(&self) -> Option<f64> {
        match self.left {
            LeftBoundary::Reflect(a) | LeftBoundary::Absorb(a) => Some(a),
            LeftBoundary::None => None,
        }
    }

    #[inline]
    fn left_reflect(&self) -> Option<f64> {
        match self.left {
            LeftBoundary::Reflect(a) => Some(a),
            _ => None,
        }
    }

    fn validate(&self, drift: &Drift, t: f64) -> Result<()> {
        if drift.is_explosive() && matches!(self.right, RightBoundary::None) {
            return Err(Error::param(
                "explosive drift (gamma > 1) needs an absorbing or reflecting right barrier",
            ));
        }
        if let RightBoundary::Moving { scale, .. } = self.right {
            if !(scale > 0.0) {
                return Err(Error::param("moving barrier scale must be > 0"));
            }
        }
        if let (Some(l), Some(r)) = (self.left_level(), self.right.level(t)) {
            if !(l < r) {
                return Err(Error::param(format!(
                    "left barrier {l} must lie below right barrier {r}"
                )));
            }
        }
        Ok(())
    }

    fn contains(&self, x: f64, t: f64) -> bool {
        self.left_level().map_or(true, |l| x >= l) && self.right.level(t).map_or(true, |r| x <= r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionScheme {
    /// Mirror the Euler proposal back across the barrier.
    MirrorFold,
    /// Apply the Skorokhod map to the Brownian bridge between grid points,
    /// using the exact conditional law of its extremum. Exact for a constant
    /// drift and a fixed barrier.
    #[default]
    BridgeExtremum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrossingDetection {
    /// A level is hit when consecutive grid states straddle or touch it.
    Grid,
    /// Also count crossings between grid points, with the Brownian-bridge
    /// crossing probability `exp(-2 (L - x)(L - y) / dt)`.
    #[default]
    BrownianBridge,
}

/// Time grid and randomness of a single path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    pub dt: f64,
    pub t_start: f64,
    /// Absolute end time.
    pub horizon: f64,
    pub seed: u64,
    pub path_id: u64,
    #[serde(default)]
    pub scheme: ReflectionScheme,
    #[serde(default)]
    pub crossing: CrossingDetection,
    /// Each increment is the normalized sum of this many standard normals, so
    /// a grid with `dt` and `merge = 2` sees the same Brownian path as a grid
    /// with `dt / 2` and `merge = 1`.
    #[serde(default = "one")]
    pub merge: u32,
}

fn one() -> u32 {
    1
}

impl SimGrid {
    pub fn new(dt: f64, t_start: f64, horizon: f64, seed: u64) -> Self {
        Self {
            dt,
            t_start,
            horizon,
            seed,
            path_id: 0,
            scheme: ReflectionScheme::default(),
            crossing: CrossingDetection::default(),
            merge: 1,
        }
    }

    pub fn with_path(mut self, path_id: u64) -> Self {
        self.path_id = path_id;
        self
    }

    pub fn with_scheme(mut self, scheme: ReflectionScheme, crossing: CrossingDetection) -> Self {
        self.scheme = scheme;
        self.crossing = crossing;
        self
    }

    /// Grid with half the step, driven by the same Brownian path.
    pub fn refined(mut self) -> Result<Self> {
        if self.merge % 2 != 0 {
            return Err(Error::param("refinement needs an even merge factor"));
        }
        self.dt /= 2.0;
        self.merge /= 2;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_start >= 0.0) {
            return Err(Error::param("t_start must be >= 0"));
        }
        if !(self.horizon > self.t_start) || self.horizon.is_infinite() {
            return Err(Error::param(format!(
                "horizon {} must exceed t_start {}",
                self.horizon, self.t_start
            )));
        }
        if self.merge == 0 {
            return Err(Error::param("merge factor must be >= 1"));
        }
        Ok(())
    }

    pub fn step_count(&self) -> u64 {
        ((self.horizon - self.t_start) / self.dt).ceil() as u64
    }
}

pub(crate) struct PathRng {
    normals: ChaCha8Rng,
    aux: ChaCha8Rng,
    merge: u32,
    merge_scale: f64,
}

impl PathRng {
    pub(crate) fn new(grid: &SimGrid) -> Self {
        let mut normals = ChaCha8Rng::seed_from_u64(grid.seed);
        normals.set_stream(2 * grid.path_id);
        let mut aux = ChaCha8Rng::seed_from_u64(grid.seed);
        aux.set_stream(2 * grid.path_id + 1);
        Self {
            normals,
            aux,
            merge: grid.merge,
            merge_scale: 1.0 / (grid.merge as f64).sqrt(),
        }
    }

    #[inline]
    pub(crate) fn normal(&mut self) -> f64 {
        if self.merge == 1 {
            return self.normals.sample(StandardNormal);
        }
        let mut s = 0.0;
        for _ in 0..self.merge {
            let z: f64 = self.normals.sample(StandardNormal);
            s += z;
        }
        s * self.merge_scale
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        // (0, 1]: keeps ln(u) finite
        1.0 - self.aux.random::<f64>()
    }
}

/// Result of one mirror-fold step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: f64,
    pub folds: u32,
    pub left_contact: bool,
    pub right_contact: bool,
}

impl Step {
    /// More than two folds in one step means `dt` is too coarse for the domain.
    pub fn flagged(&self) -> bool {
        self.folds > 2
    }
}

/// One Euler step `x + B(x) dt + sqrt(dt) noise`, folded back into
/// `[left, right(t + dt)]` by mirror reflection. Absorbing levels are not
/// folded; they are the caller's stopping conditions.
pub fn step(state: f64, t: f64, drift: &Drift, dt: f64, noise: f64, refl: &ReflectionSpec) -> Step {
    let proposal = state + drift.at(state) * dt + dt.sqrt() * noise;
    fold(proposal, refl.left_reflect(), refl.right.reflect_level(t + dt))
}

fn fold(mut y: f64, lo: Option<f64>, hi: Option<f64>) -> Step {
    let lo_v = lo.unwrap_or(f64::NEG_INFINITY);
    let hi_v = hi.unwrap_or(f64::INFINITY);
    let mut folds = 0;
    let (mut left_contact, mut right_contact) = (false, false);
    while folds < MAX_FOLDS {
        if y < lo_v {
            y = 2.0 * lo_v - y;
            left_contact = true;
        } else if y > hi_v {
            y = 2.0 * hi_v - y;
            right_contact = true;
        } else {
            break;
        }
        folds += 1;
    }
    Step {
        state: y.clamp(lo_v, hi_v),
        folds,
        left_contact,
        right_contact,
    }
}

/// Skorokhod map applied to the bridge from `x` to the proposal `y`.
#[inline]
fn bridge_reflect(x: f64, y: f64, dt: f64, lo: Option<f64>, hi: Option<f64>, rng: &mut PathRng) -> Step {
    let mut y = y;
    let (mut left_contact, mut right_contact) = (false, false);
    if let Some(h) = hi {
        let e = 2.0 * (h - x) * (h - y) / dt;
        if y >= h || e < BRIDGE_CUTOFF {
            let u = rng.uniform();
            if y >= h || u < (-e).exp() {
                let max = 0.5 * (x + y + ((y - x) * (y - x) - 2.0 * dt * u.ln()).sqrt());
                y -= max - h;
                right_contact = true;
            }
        }
    }
    if let Some(l) = lo {
        let e = 2.0 * (x - l) * (y - l) / dt;
        if y <= l || e < BRIDGE_CUTOFF {
            let u = rng.uniform();
            if y <= l || u < (-e).exp() {
                let min = 0.5 * (x + y - ((y - x) * (y - x) - 2.0 * dt * u.ln()).sqrt());
                y += l - min;
                left_contact = true;
            }
        }
    }
    if let Some(h) = hi {
        y = y.min(h);
    }
    if let Some(l) = lo {
        y = y.max(l);
    }
    Step {
        state: y,
        folds: 0,
        left_contact,
        right_contact,
    }
}

#[inline]
fn crosses(x: f64, y: f64, level: f64, dt: f64, bridge: bool, rng: &mut PathRng) -> bool {
    let (a, b) = (x - level, y - level);
    if a * b <= 0.0 {
        return true;
    }
    if !bridge {
        return false;
    }
    let e = 2.0 * a * b / dt;
    e < BRIDGE_CUTOFF && rng.uniform() < (-e).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub level: f64,
    pub time: f64,
}

/// One point of a ratio track. `min_ratio`/`max_ratio` cover every grid
/// point since the previous sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub t: f64,
    pub ratio: f64,
    pub deviation: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Per log-time unit `[e^j, e^(j+1))` statistics. Index 0 also covers `t < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeStats {
    pub returns: u64,
    pub min_state: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub path_id: u64,
    pub start_time: f64,
    pub terminal_time: f64,
    pub terminal_state: f64,
    /// Position in full dimension for the ball simulation.
    pub terminal_position: Option<Vec<f64>>,
    pub hit_record: Vec<Hit>,
    pub censored: bool,
    pub boundary_contact_count: u64,
    pub left_contact_count: u64,
    pub flagged_steps: u64,
    pub ratio_track: Option<Vec<TrackSample>>,
    pub decades: Vec<DecadeStats>,
}

impl PathOutcome {
    /// Elapsed time to the first recorded hit.
    pub fn first_hit_time(&self) -> Option<f64> {
        self.hit_record.first().map(|h| h.time - self.start_time)
    }

    pub fn first_hit_level(&self) -> Option<f64> {
        self.hit_record.first().map(|h| h.level)
    }

    pub fn returns_in_decade(&self, j: usize) -> u64 {
        self.decades.get(j).map_or(0, |d| d.returns)
    }
}

/// Where to sample `X/f` and `f - X` along a moving-domain path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// First sample time; later ones follow `t_k = first * ratio^k`.
    pub first_sample: f64,
    pub ratio: f64,
    /// After touching the left barrier, the path must climb above
    /// `left + return_rearm` before another return is counted.
    pub return_rearm: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            first_sample: 1.0,
            ratio: 1.05,
            return_rearm: 0.5,
        }
    }
}

impl SamplingPlan {
    fn validate(&self) -> Result<()> {
        if !(self.first_sample > 0.0 && self.ratio > 1.0 && self.return_rearm >= 0.0) {
            return Err(Error::param(
                "sampling plan needs first_sample > 0, ratio > 1, return_rearm >= 0",
            ));
        }
        Ok(())
    }
}

struct Tracker {
    plan: SamplingPlan,
    next_sample: f64,
    samples: Vec<TrackSample>,
    win_min: f64,
    win_max: f64,
    decades: Vec<DecadeStats>,
    decade_end: f64,
    armed: bool,
    left: f64,
}

impl Tracker {
    fn new(plan: SamplingPlan, t0: f64, x0: f64, left: f64) -> Self {
        let mut next_sample = plan.first_sample;
        while next_sample < t0 {
            next_sample *= plan.ratio;
        }
        let j0 = if t0 < 1.0 { 0 } else { t0.ln().floor() as usize };
        let mut decades = vec![
            DecadeStats {
                returns: 0,
                min_state: f64::INFINITY
            };
            j0 + 1
        ];
        decades[j0].min_state = x0;
        Self {
            plan,
            next_sample,
            samples: Vec::new(),
            win_min: f64::INFINITY,
            win_max: f64::NEG_INFINITY,
            decades,
            decade_end: ((j0 + 1) as f64).exp(),
            armed: x0 > left + plan.return_rearm,
            left,
        }
    }

    #[inline]
    fn record(&mut self, t: f64, x: f64, f_t: f64, left_contact: bool) {
        while t >= self.decade_end {
            self.decades.push(DecadeStats {
                returns: 0,
                min_state: f64::INFINITY,
            });
            self.decade_end = (self.decades.len() as f64).exp();
        }
        let cur = self.decades.last_mut().expect("at least one decade");
        if x < cur.min_state {
            cur.min_state = x;
        }
        if left_contact && self.armed {
            cur.returns += 1;
            self.armed = false;
        } else if x > self.left + self.plan.return_rearm {
            self.armed = true;
        }

        let ratio = x / f_t;
        self.win_min = self.win_min.min(ratio);
        self.win_max = self.win_max.max(ratio);
        if t >= self.next_sample {
            self.samples.push(TrackSample {
                t,
                ratio,
                deviation: f_t - x,
                min_ratio: self.win_min,
                max_ratio: self.win_max,
            });
            self.win_min = f64::INFINITY;
            self.win_max = f64::NEG_INFINITY;
            while self.next_sample <= t {
                self.next_sample *= self.plan.ratio;
            }
        }
    }

    /// Final sample at the last grid time, unless it was just taken.
    fn close(&mut self, t: f64, x: f64, f_t: f64) {
        if self.win_min.is_finite() {
            self.samples.push(TrackSample {
                t,
                ratio: x / f_t,
                deviation: f_t - x,
                min_ratio: self.win_min,
                max_ratio: self.win_max,
            });
        }
    }
}

fn run_1d(
    start: f64,
    targets: &[f64],
    drift: &Drift,
    refl: &ReflectionSpec,
    grid: &SimGrid,
    plan: Option<SamplingPlan>,
) -> Result<PathOutcome> {
    grid.validate()?;
    refl.validate(drift, grid.t_start)?;
    if !refl.contains(start, grid.t_start) || !start.is_finite() {
        return Err(Error::domain(format!(
            "start {start} outside the domain at t = {}",
            grid.t_start
        )));
    }
    let mut stops: Vec<f64> = targets.to_vec();
    if let LeftBoundary::Absorb(a) = refl.left {
        stops.push(a);
    }
    if let RightBoundary::Absorb { at } = refl.right {
        stops.push(at);
    }

    let mut out = PathOutcome {
        path_id: grid.path_id,
        start_time: grid.t_start,
        terminal_time: grid.t_start,
        terminal_state: start,
        terminal_position: None,
        hit_record: Vec::new(),
        censored: false,
        boundary_contact_count: 0,
        left_contact_count: 0,
        flagged_steps: 0,
        ratio_track: None,
        decades: Vec::new(),
    };
    if let Some(&level) = stops.iter().find(|&&l| l == start) {
        out.hit_record.push(Hit {
            level,
            time: grid.t_start,
        });
        return Ok(out);
    }

    let growth = match refl.right {
        RightBoundary::Moving { f, .. } => Some(f),
        _ => None,
    };
    let mut tracker = match (plan, growth) {
        (Some(p), Some(_)) => {
            p.validate()?;
            Some(Tracker::new(p, grid.t_start, start, refl.left_reflect().unwrap_or(1.0)))
        }
        (Some(_), None) => {
            return Err(Error::param("ratio tracking needs a moving right barrier"))
        }
        _ => None,
    };

    let mut rng = PathRng::new(grid);
    let sqrt_dt = grid.dt.sqrt();
    let bridge = grid.crossing == CrossingDetection::BrownianBridge;
    let lo = refl.left_reflect();
    let n = grid.step_count();
    let mut x = start;
    let mut t = grid.t_start;
    for i in 1..=n {
        let t_next = (grid.t_start + i as f64 * grid.dt).min(grid.horizon);
        let dt = t_next - t;
        let z = rng.normal();
        let sd = if dt == grid.dt { sqrt_dt } else { dt.sqrt() };
        let y = x + drift.at(x) * dt + sd * z;
        let hi = refl.right.reflect_level(t_next);
        let s = match grid.scheme {
            ReflectionScheme::MirrorFold => fold(y, lo, hi),
            ReflectionScheme::BridgeExtremum => bridge_reflect(x, y, dt, lo, hi, &mut rng),
        };
        if s.flagged() {
            out.flagged_steps += 1;
        }
        if s.left_contact {
            out.left_contact_count += 1;
        }
        if s.left_contact || s.right_contact {
            out.boundary_contact_count += 1;
        }
        for &level in &stops {
            if crosses(x, y, level, dt, bridge, &mut rng)
                || crosses(x, s.state, level, dt, false, &mut rng)
            {
                out.hit_record.push(Hit {
                    level,
                    time: t_next,
                });
                break;
            }
        }
        x = s.state;
        t = t_next;
        if let Some(tr) = tracker.as_mut() {
            let f_t = hi.expect("moving barrier") / moving_scale(&refl.right);
            tr.record(t, x, f_t, s.left_contact);
        }
        if !out.hit_record.is_empty() {
            out.terminal_state = out.hit_record[0].level;
            out.terminal_time = t;
            break;
        }
    }
    if out.hit_record.is_empty() {
        out.terminal_state = x;
        out.terminal_time = t;
        out.censored = !stops.is_empty();
    }
    if let Some(mut tr) = tracker {
        if let Some(h) = refl.right.reflect_level(t) {
            tr.close(t, x, h / moving_scale(&refl.right));
        }
        out.ratio_track = Some(tr.samples);
        out.decades = tr.decades;
    }
    Ok(out)
}

fn moving_scale(right: &RightBoundary) -> f64 {
    match right {
        RightBoundary::Moving { scale, .. } => *scale,
        _ => 1.0,
    }
}

/// Simulate until the path first reaches one of `target_levels` (or an
/// absorbing barrier). Paths that outlive the horizon come back censored.
pub fn sample_hitting_time(
    start: f64,
    target_levels: &[f64],
    drift: &Drift,
    refl: &ReflectionSpec,
    grid: &SimGrid,
) -> Result<PathOutcome> {
    run_1d(start, target_levels, drift, refl, grid, None)
}

/// General reflected path without stopping levels; returns the state at the horizon.
pub fn simulate_reflected(
    start: f64,
    drift: &Drift,
    refl: &ReflectionSpec,
    grid: &SimGrid,
) -> Result<PathOutcome> {
    run_1d(start, &[], drift, refl, grid, None)
}

/// The process on `[1, f(t)]`, reflected at both ends, with ratio and
/// deviation samples on the plan's geometric grid and per-decade return
/// counts.
pub fn simulate_moving_domain(
    start: f64,
    drift: &Drift,
    f: &GrowthFunction,
    grid: &SimGrid,
    plan: SamplingPlan,
) -> Result<PathOutcome> {
    let upper = f.at(grid.t_start);
    if !(1.0..=upper).contains(&start) {
        return Err(Error::domain(format!(
            "start {start} outside [1, f(t_start) = {upper}]"
        )));
    }
    run_1d(
        start,
        &[],
        drift,
        &ReflectionSpec::moving_interval(*f),
        grid,
        Some(plan),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallMode {
    /// One-dimensional process `|X|` with drift `B(r) + (d-1)/(2r)`.
    Radial,
    /// Euler scheme in `R^d` with radial projection at the outer sphere.
    Full,
}

/// Process in the growing ball `radius * f(t)` with radial drift
/// `b_field(|x|) x/|x|`, stopped when `|X|` reaches one of `targets`.
pub fn simulate_ball(
    start: &[f64],
    b_field: Option<PowerDrift>,
    domain: &DomainSpec,
    grid: &SimGrid,
    targets: &[f64],
    mode: BallMode,
) -> Result<PathOutcome> {
    let Shape::Ball { radius } = domain.shape() else {
        return Err(Error::param("simulate_ball needs a ball domain"));
    };
    let d = domain.dimension();
    if start.len() != d {
        return Err(Error::param(format!(
            "start has {} coordinates, domain dimension is {d}",
            start.len()
        )));
    }
    let r0 = norm(start);
    let outer0 = domain.outer_edge(grid.t_start);
    if !(1.0..=outer0).contains(&r0) {
        return Err(Error::domain(format!(
            "|start| = {r0} outside [1, {outer0}]"
        )));
    }
    let right = RightBoundary::Moving {
        f: *domain.growth(),
        scale: radius,
    };
    match mode {
        BallMode::Radial => {
            let drift = Drift::Radial {
                base: b_field,
                dimension: d,
            };
            let refl = ReflectionSpec::new(LeftBoundary::Reflect(1.0), right);
            run_1d(r0, targets, &drift, &refl, grid, None)
        }
        BallMode::Full => run_full_ball(start, b_field, &right, grid, targets),
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn run_full_ball(
    start: &[f64],
    b_field: Option<PowerDrift>,
    right: &RightBoundary,
    grid: &SimGrid,
    targets: &[f64],
) -> Result<PathOutcome> {
    grid.validate()?;
    if b_field.is_some_and(|b| b.gamma() > 1.0) {
        return Err(Error::param("explosive drift is not supported in full mode"));
    }
    let d = start.len();
    let mut out = PathOutcome {
        path_id: grid.path_id,
        start_time: grid.t_start,
        terminal_time: grid.t_start,
        terminal_state: norm(start),
        terminal_position: Some(start.to_vec()),
        hit_record: Vec::new(),
        censored: false,
        boundary_contact_count: 0,
        left_contact_count: 0,
        flagged_steps: 0,
        ratio_track: None,
        decades: Vec::new(),
    };
    let r_start = norm(start);
    if let Some(&level) = targets.iter().find(|&&l| l == r_start) {
        out.hit_record.push(Hit {
            level,
            time: grid.t_start,
        });
        return Ok(out);
    }
    let mut rng = PathRng::new(grid);
    let sqrt_dt = grid.dt.sqrt();
    let bridge = grid.crossing == CrossingDetection::BrownianBridge;
    let mut x = start.to_vec();
    let mut y = vec![0.0; d];
    let mut r = r_start;
    let mut t = grid.t_start;
    for i in 1..=grid.step_count() {
        let t_next = (grid.t_start + i as f64 * grid.dt).min(grid.horizon);
        let dt = t_next - t;
        let sd = if dt == grid.dt { sqrt_dt } else { dt.sqrt() };
        let push = match b_field {
            Some(b) if r > 0.0 => b.at(r) * dt / r,
            _ => 0.0,
        };
        for k in 0..d {
            y[k] = x[k] + push * x[k] + sd * rng.normal();
        }
        let r_prop = norm(&y);
        let outer = right.reflect_level(t_next).expect("moving barrier");
        let mut r_new = r_prop;
        if r_prop > outer {
            let s = fold(r_prop, None, Some(outer));
            r_new = s.state.abs();
            let scale = if r_prop > 0.0 { s.state / r_prop } else { 0.0 };
            for v in y.iter_mut() {
                *v *= scale;
            }
            out.boundary_contact_count += 1;
            if s.flagged() {
                out.flagged_steps += 1;
            }
        }
        for &level in targets {
            if crosses(r, r_prop, level, dt, bridge, &mut rng)
                || crosses(r, r_new, level, dt, false, &mut rng)
            {
                out.hit_record.push(Hit {
                    level,
                    time: t_next,
                });
                break;
            }
        }
        std::mem::swap(&mut x, &mut y);
        r = r_new;
        t = t_next;
        if !out.hit_record.is_empty() {
            break;
        }
    }
    out.terminal_time = t;
    out.terminal_state = out.hit_record.first().map_or(r, |h| h.level);
    out.terminal_position = Some(x);
    out.censored = out.hit_record.is_empty() && !targets.is_empty();
    Ok(out)
}
