//! Config-driven experiment runner behind the `growdiff` binary.
//!
//! Every subcommand reads an optional TOML file with a `[grid]` section, an
//! `[output]` section and one section per experiment kind; missing values
//! fall back to the suite defaults (including a fixed seed per suite). The
//! resolved configuration is written next to the results, so re-running from
//! `config.toml` reproduces `summary.json` byte for byte.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic;
use crate::error::{Error, Result};
use crate::mc::{self, EnsembleSettings};
use crate::model::{ConstantDrift, DomainSpec, GrowthFunction, PowerDrift, RadialBounds, Shape};
use crate::sde::{CrossingDetection, PathOutcome, ReflectionScheme, SamplingPlan, TrackSample};

/// Dichotomy runs above this many Euler steps trigger a warning.
pub const STEP_WARNING: f64 = 5e9;

#[derive(Debug, Parser)]
#[command(name = "growdiff", version, about = "Reflected diffusions in growing domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Scale function values and the two-sided exit probability.
    Phi(RunArgs),
    /// Recurrence/transience verdict for a drift and growth coefficient.
    Classify(RunArgs),
    /// Simulated MGF of the upper hitting time against its closed form.
    Mgf(RunArgs),
    /// Simulated Laplace transform of the lower hitting time against its closed form.
    Laplace(RunArgs),
    /// Simulated transforms at the two guaranteed rates, against the bound 2.
    Bounds(RunArgs),
    /// Returns to the inner barrier over the last two log-time units.
    Dichotomy(RunArgs),
    /// Lower growth ratio X/f in the critical transient regime.
    Liminf(RunArgs),
    /// Ratio and deviation growth below a prescribed domain.
    Growth(RunArgs),
    /// Radial against full-dimensional simulation in a ball.
    Ball(RunArgs),
}

impl Command {
    pub fn kind(&self) -> Kind {
        match self {
            Command::Phi(_) => Kind::Phi,
            Command::Classify(_) => Kind::Classify,
            Command::Mgf(_) => Kind::MgfCheck,
            Command::Laplace(_) => Kind::LaplaceCheck,
            Command::Bounds(_) => Kind::BoundCheck,
            Command::Dichotomy(_) => Kind::Dichotomy,
            Command::Liminf(_) => Kind::Liminf,
            Command::Growth(_) => Kind::Growth,
            Command::Ball(_) => Kind::BallConsistency,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Phi(a)
            | Command::Classify(a)
            | Command::Mgf(a)
            | Command::Laplace(a)
            | Command::Bounds(a)
            | Command::Dichotomy(a)
            | Command::Liminf(a)
            | Command::Growth(a)
            | Command::Ball(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `grid.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `grid.workers`.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Phi,
    Classify,
    MgfCheck,
    LaplaceCheck,
    BoundCheck,
    Dichotomy,
    Liminf,
    Growth,
    BallConsistency,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Phi => "phi",
            Kind::Classify => "classify",
            Kind::MgfCheck => "mgf-check",
            Kind::LaplaceCheck => "laplace-check",
            Kind::BoundCheck => "bound-check",
            Kind::Dichotomy => "dichotomy",
            Kind::Liminf => "liminf",
            Kind::Growth => "growth",
            Kind::BallConsistency => "ball-consistency",
        }
    }

    /// Suite defaults. `horizon` is `None` where the experiment derives it.
    fn default_grid(self) -> GridConfig {
        let (dt, horizon, n_paths, seed) = match self {
            Kind::Phi => (1e-4, Some(100.0), 100_000, 11),
            Kind::Classify => return GridConfig::default(),
            Kind::MgfCheck => (1e-4, Some(200.0), 200_000, 12),
            Kind::LaplaceCheck => (1e-4, Some(200.0), 200_000, 13),
            Kind::BoundCheck => (1e-4, Some(200.0), 100_000, 14),
            Kind::Dichotomy => (1e-3, None, 50, 15),
            Kind::Liminf => (1e-3, None, 50, 16),
            Kind::Growth => (1e-2, None, 50, 17),
            Kind::BallConsistency => (1e-4, Some(100.0), 100_000, 18),
        };
        GridConfig {
            dt: Some(dt),
            horizon,
            n_paths: Some(n_paths),
            seed: Some(seed),
            workers: Some(1),
            scheme: Some(ReflectionScheme::default()),
            crossing: Some(CrossingDetection::default()),
        }
    }

    fn derives_horizon(self) -> bool {
        matches!(self, Kind::Dichotomy | Kind::Liminf | Kind::Growth)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<ReflectionScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing: Option<CrossingDetection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiParams {
    pub b: f64,
    pub gamma: f64,
    pub points: Vec<f64>,
    /// Radial scale function in this dimension instead of the interval one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub alpha: f64,
    pub x: f64,
    pub beta: f64,
    /// Also estimate the exit probability by simulation, at `dt` and `dt/2`.
    pub monte_carlo: bool,
}

impl Default for PhiParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            gamma: 0.0,
            points: vec![1.0, 1.5, 2.0, 3.0, 5.0],
            dimension: None,
            alpha: 1.0,
            x: 1.5,
            beta: 2.0,
            monte_carlo: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    #[default]
    Ball,
    Star,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyParams {
    pub b: f64,
    pub gamma: f64,
    pub c: f64,
    pub dimension: usize,
    pub shape: ShapeKind,
    pub rad_minus: f64,
    pub rad_plus: f64,
    /// Lower radial drift bound; defaults to the upper one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_minus: Option<f64>,
    pub f_energy_finite: bool,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            gamma: 0.0,
            c: 0.4,
            dimension: 1,
            shape: ShapeKind::Ball,
            rad_minus: 1.0,
            rad_plus: 1.0,
            b_minus: None,
            gamma_minus: None,
            f_energy_finite: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MgfParams {
    pub d_value: f64,
    pub x: f64,
    pub beta: f64,
}

impl Default for MgfParams {
    fn default() -> Self {
        Self {
            d_value: 1.0,
            x: 1.0,
            beta: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaplaceParams {
    pub d_value: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LaplaceParams {
    fn default() -> Self {
        Self {
            d_value: 1.0,
            lambda: 1.0,
            alpha: 1.0,
            beta: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsParams {
    pub b: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Start of the lower-hitting check; defaults to `beta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_hat: Option<f64>,
    /// Start of the upper-hitting check; defaults to `alpha`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_bar: Option<f64>,
}

impl Default for BoundsParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            gamma: 0.0,
            alpha: 1.0,
            beta: 2.0,
            x_hat: None,
            x_bar: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyParams {
    pub b: f64,
    pub gamma: f64,
    /// One run per growth coefficient.
    pub c: Vec<f64>,
    /// Paths run to `t = e^horizon_exponent`.
    pub horizon_exponent: u32,
}

impl Default for DichotomyParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            gamma: 0.0,
            c: vec![0.4, 2.0],
            horizon_exponent: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiminfParams {
    pub b: f64,
    pub gamma: f64,
    pub c: f64,
    /// Paths run to `window[1]`.
    pub window: [f64; 2],
    pub sampling_ratio: f64,
}

impl Default for LiminfParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            gamma: 0.0,
            c: 1.0,
            window: [5f64.exp(), 10f64.exp()],
            sampling_ratio: 1.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthParams {
    pub b: f64,
    pub gamma: f64,
    pub growth: GrowthFunction,
    /// Paths run to `window[1]`.
    pub window: [f64; 2],
    pub sampling_ratio: f64,
    /// Exponents for the scaled deviation; defaults to `q0` and `q0 + 0.1`.
    pub q_candidates: Vec<f64>,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            gamma: -0.5,
            growth: GrowthFunction::Power { l: 0.5 },
            window: [1e3, 1e5],
            sampling_ratio: 1.01,
            q_candidates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallParams {
    pub dimension: usize,
    /// Radial drift amplitude; zero drift when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub gamma: f64,
    pub alpha: f64,
    pub x: f64,
    pub beta: f64,
    /// Radius of the fixed outer sphere.
    pub outer: f64,
}

impl Default for BallParams {
    fn default() -> Self {
        Self {
            dimension: 3,
            b: None,
            gamma: 0.0,
            alpha: 1.0,
            x: 1.5,
            beta: 2.0,
            outer: 2.5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mgf: Option<MgfParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laplace: Option<LaplaceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dichotomy: Option<DichotomyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liminf: Option<LiminfParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<BallParams>,
}

fn require(ok: bool, field: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, message))
    }
}

fn check_power(section: &str, b: f64, gamma: f64) -> Result<()> {
    require(b > 0.0 && b.is_finite(), &format!("{section}.b"), format!("must be > 0, got {b}"))?;
    require(
        gamma > -1.0 && gamma.is_finite(),
        &format!("{section}.gamma"),
        format!("must be > -1, got {gamma}"),
    )
}

fn check_window(section: &str, w: [f64; 2]) -> Result<()> {
    require(
        w[0] >= 1.0 && w[1] > w[0] && w[1].is_finite(),
        &format!("{section}.window"),
        format!("need 1 <= t_lo < t_hi, got {w:?}"),
    )
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("<config>", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<snapshot>", e.to_string()))
    }

    /// Fill in defaults for `kind`, apply command-line overrides, drop the
    /// sections of other kinds and validate the result.
    pub fn resolve(mut self, kind: Kind, args: &RunArgs) -> Result<Self> {
        if let Some(k) = self.kind {
            require(
                k == kind,
                "kind",
                format!("config is for `{}`, subcommand runs `{}`", k.name(), kind.name()),
            )?;
        }
        if kind.derives_horizon() && self.grid.horizon.is_some() {
            return Err(Error::config(
                "grid.horizon",
                format!("`{}` derives its horizon from its own section", kind.name()),
            ));
        }
        let d = kind.default_grid();
        let g = &mut self.grid;
        if kind == Kind::Classify {
            *g = GridConfig::default();
        } else {
            g.dt = g.dt.or(d.dt);
            g.horizon = g.horizon.or(d.horizon);
            g.n_paths = g.n_paths.or(d.n_paths);
            g.seed = args.seed.or(g.seed).or(d.seed);
            g.workers = args.workers.or(g.workers).or(d.workers);
            g.scheme = g.scheme.or(d.scheme);
            g.crossing = g.crossing.or(d.crossing);
        }
        if let Some(out) = &args.out {
            self.output.dir = Some(out.clone());
        }
        let resolved = ExperimentConfig {
            kind: Some(kind),
            grid: self.grid,
            output: self.output,
            phi: (kind == Kind::Phi).then(|| self.phi.unwrap_or_default()),
            classify: (kind == Kind::Classify).then(|| self.classify.unwrap_or_default()),
            mgf: (kind == Kind::MgfCheck).then(|| self.mgf.unwrap_or_default()),
            laplace: (kind == Kind::LaplaceCheck).then(|| self.laplace.unwrap_or_default()),
            bounds: (kind == Kind::BoundCheck).then(|| self.bounds.unwrap_or_default()),
            dichotomy: (kind == Kind::Dichotomy).then(|| self.dichotomy.unwrap_or_default()),
            liminf: (kind == Kind::Liminf).then(|| self.liminf.unwrap_or_default()),
            growth: (kind == Kind::Growth).then(|| self.growth.unwrap_or_default()),
            ball: (kind == Kind::BallConsistency).then(|| self.ball.unwrap_or_default()),
        };
        resolved.validate(kind)?;
        Ok(resolved)
    }

    fn validate(&self, kind: Kind) -> Result<()> {
        if kind != Kind::Classify {
            let g = &self.grid;
            let dt = g.dt.unwrap_or(f64::NAN);
            require(dt > 0.0 && dt.is_finite(), "grid.dt", format!("must be > 0, got {dt}"))?;
            if let Some(h) = g.horizon {
                require(h > 0.0 && h.is_finite(), "grid.horizon", format!("must be > 0, got {h}"))?;
            }
            let n = g.n_paths.unwrap_or(0);
            let min = match kind {
                Kind::Phi | Kind::BallConsistency => mc::MIN_PATHS,
                _ => 2,
            };
            require(n >= min, "grid.n_paths", format!("need at least {min}, got {n}"))?;
            require(g.workers != Some(0), "grid.workers", "must be >= 1")?;
        }
        match kind {
            Kind::Phi => {
                let p = self.phi.as_ref().expect("resolved");
                check_power("phi", p.b, p.gamma)?;
                require(
                    p.points.iter().all(|&x| x >= 1.0 && x.is_finite()),
                    "phi.points",
                    "every point must be >= 1",
                )?;
                if let Some(d) = p.dimension {
                    require(d >= 2, "phi.dimension", "radial scale function needs dimension >= 2")?;
                }
                require(
                    1.0 <= p.alpha && p.alpha <= p.x && p.x <= p.beta && p.alpha < p.beta,
                    "phi.x",
                    format!("need 1 <= alpha <= x <= beta, got {}, {}, {}", p.alpha, p.x, p.beta),
                )?;
            }
            Kind::Classify => {
                let p = self.classify.as_ref().expect("resolved");
                check_power("classify", p.b, p.gamma)?;
                require(p.c > 0.0 && p.c.is_finite(), "classify.c", "must be > 0")?;
                require(p.dimension >= 1, "classify.dimension", "must be >= 1")?;
                require(
                    p.rad_minus > 0.0 && p.rad_minus <= p.rad_plus,
                    "classify.rad_minus",
                    "need 0 < rad_minus <= rad_plus",
                )?;
            }
            Kind::MgfCheck => {
                let p = self.mgf.as_ref().expect("resolved");
                require(p.d_value > 0.0, "mgf.d_value", "must be > 0")?;
                require(
                    1.0 <= p.x && p.x <= p.beta && p.beta.is_finite(),
                    "mgf.x",
                    format!("need 1 <= x <= beta, got {}, {}", p.x, p.beta),
                )?;
            }
            Kind::LaplaceCheck => {
                let p = self.laplace.as_ref().expect("resolved");
                require(p.d_value > 0.0, "laplace.d_value", "must be > 0")?;
                require(p.lambda > 0.0 && p.lambda.is_finite(), "laplace.lambda", "must be > 0")?;
                require(
                    1.0 <= p.alpha && p.alpha <= p.beta && p.beta.is_finite(),
                    "laplace.alpha",
                    format!("need 1 <= alpha <= beta, got {}, {}", p.alpha, p.beta),
                )?;
            }
            Kind::BoundCheck => {
                let p = self.bounds.as_ref().expect("resolved");
                check_power("bounds", p.b, p.gamma)?;
                require(
                    1.0 <= p.alpha && p.alpha < p.beta && p.beta.is_finite(),
                    "bounds.alpha",
                    format!("need 1 <= alpha < beta, got {}, {}", p.alpha, p.beta),
                )?;
                for (name, v) in [("bounds.x_hat", p.x_hat), ("bounds.x_bar", p.x_bar)] {
                    if let Some(x) = v {
                        require(p.alpha <= x && x <= p.beta, name, "must lie in [alpha, beta]")?;
                    }
                }
            }
            Kind::Dichotomy => {
                let p = self.dichotomy.as_ref().expect("resolved");
                check_power("dichotomy", p.b, p.gamma)?;
                require(
                    !p.c.is_empty() && p.c.iter().all(|&c| c > 0.0 && c.is_finite()),
                    "dichotomy.c",
                    "need at least one coefficient, all > 0",
                )?;
                require(
                    (2..=40).contains(&p.horizon_exponent),
                    "dichotomy.horizon_exponent",
                    "must lie in 2..=40",
                )?;
            }
            Kind::Liminf => {
                let p = self.liminf.as_ref().expect("resolved");
                check_power("liminf", p.b, p.gamma)?;
                check_window("liminf", p.window)?;
                require(p.sampling_ratio > 1.0, "liminf.sampling_ratio", "must be > 1")?;
                let d = PowerDrift::new(p.b, p.gamma)?;
                require(
                    analytic::liminf_constant(&d, p.c).is_ok(),
                    "liminf.c",
                    "need gamma < 1 and 2 b c^(1+gamma)/(1+gamma) > 1",
                )?;
            }
            Kind::Growth => {
                let p = self.growth.as_ref().expect("resolved");
                check_power("growth", p.b, p.gamma)?;
                check_window("growth", p.window)?;
                require(p.sampling_ratio > 1.0, "growth.sampling_ratio", "must be > 1")?;
                if let Err(e) = p.growth.check_against_drift(p.gamma) {
                    return Err(Error::config("growth.growth", e.to_string()));
                }
            }
            Kind::BallConsistency => {
                let p = self.ball.as_ref().expect("resolved");
                require(p.dimension >= 2, "ball.dimension", "must be >= 2")?;
                if let Some(b) = p.b {
                    check_power("ball", b, p.gamma)?;
                }
                require(
                    1.0 <= p.alpha && p.alpha < p.x && p.x < p.beta && p.beta <= p.outer,
                    "ball.x",
                    "need 1 <= alpha < x < beta <= outer",
                )?;
            }
        }
        Ok(())
    }

    fn settings(&self) -> EnsembleSettings {
        let g = &self.grid;
        EnsembleSettings {
            n_paths: g.n_paths.unwrap_or(0),
            dt: g.dt.unwrap_or(0.0),
            horizon: g.horizon.unwrap_or(f64::NAN),
            seed: g.seed.unwrap_or(0),
            workers: g.workers,
            scheme: g.scheme.unwrap_or_default(),
            crossing: g.crossing.unwrap_or_default(),
        }
    }
}

/// One CSV table: a name (file stem), column names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Header comment, column row, then one line per row; reals carry 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# columns: {}\n{}\n", self.columns.join(","), self.columns.join(","));
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                match c {
                    Cell::Int(v) => write!(s, "{v}"),
                    Cell::Real(v) => write!(s, "{v:.16e}"),
                    Cell::Text(v) => write!(s, "{v}"),
                }
                .expect("write to string");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub kind: Kind,
    pub version: String,
    pub config: ExperimentConfig,
    pub results: Value,
    /// Analytic values the results are compared against.
    pub references: Value,
    pub warnings: Vec<String>,
    /// Kept out of `summary.json` so that file is reproducible.
    #[serde(skip)]
    pub wall_time: f64,
    #[serde(skip)]
    pub tables: Vec<Table>,
    /// Per-path tracks or counts for plotting.
    #[serde(skip)]
    pub tracks: Option<Table>,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

/// Execute a resolved configuration.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    let kind = config
        .kind
        .ok_or_else(|| Error::config("kind", "unresolved configuration"))?;
    let started = Instant::now();
    // the output location is not part of what a run computes
    let mut snapshot = config.clone();
    snapshot.output = OutputConfig::default();
    let mut record = RunRecord {
        kind,
        version: env!("CARGO_PKG_VERSION").into(),
        config: snapshot,
        results: Value::Null,
        references: Value::Null,
        warnings: Vec::new(),
        wall_time: 0.0,
        tables: Vec::new(),
        tracks: None,
    };
    let settings = config.settings();
    match kind {
        Kind::Phi => run_phi(config.phi.as_ref().expect("resolved"), &settings, &mut record)?,
        Kind::Classify => run_classify(config.classify.as_ref().expect("resolved"), &mut record)?,
        Kind::MgfCheck => {
            let p = config.mgf.as_ref().expect("resolved");
            let check = mc::mgf_check(ConstantDrift::new(p.d_value)?, p.x, p.beta, &settings)?;
            record.references = json!({ "mgf": check.analytic, "lambda": p.d_value * p.d_value / 2.0 });
            record.tables.push(check_table(&[&check]));
            record.results = json!({ "check": to_json(&check), "within_3se": check.within(3.0) });
        }
        Kind::LaplaceCheck => {
            let p = config.laplace.as_ref().expect("resolved");
            let check = mc::laplace_check(
                ConstantDrift::new(p.d_value)?,
                p.lambda,
                p.alpha,
                p.beta,
                &settings,
            )?;
            record.references = json!({ "laplace": check.analytic });
            record.tables.push(check_table(&[&check]));
            record.results = json!({ "check": to_json(&check), "within_3se": check.within(3.0) });
        }
        Kind::BoundCheck => {
            let p = config.bounds.as_ref().expect("resolved");
            let d = PowerDrift::new(p.b, p.gamma)?;
            let hat = mc::lambda_hat_check(d, p.alpha, p.beta, p.x_hat.unwrap_or(p.beta), &settings)?;
            let bar = mc::lambda_bar_check(d, p.alpha, p.beta, p.x_bar.unwrap_or(p.alpha), &settings)?;
            let mut t = Table::new("checks", &["label", "lambda", "bound", "estimate", "std_error"]);
            for c in [&hat, &bar] {
                t.rows.push(vec![
                    Cell::Text(c.label.clone()),
                    Cell::Real(c.lambda),
                    Cell::Real(c.bound),
                    Cell::Real(c.estimate.mean),
                    Cell::Real(c.estimate.std_error),
                ]);
            }
            record.tables.push(t);
            record.references = json!({ "lambda_hat": hat.lambda, "lambda_bar": bar.lambda, "bound": 2.0 });
            record.results = json!({
                "lambda_hat": to_json(&hat),
                "lambda_bar": to_json(&bar),
                "holds_3se": hat.holds(3.0) && bar.holds(3.0),
            });
        }
        Kind::Dichotomy => run_dichotomy(config.dichotomy.as_ref().expect("resolved"), &settings, &mut record)?,
        Kind::Liminf => run_liminf(config.liminf.as_ref().expect("resolved"), &settings, &mut record)?,
        Kind::Growth => run_growth(config.growth.as_ref().expect("resolved"), &settings, &mut record)?,
        Kind::BallConsistency => {
            let p = config.ball.as_ref().expect("resolved");
            let b = p.b.map(|b| PowerDrift::new(b, p.gamma)).transpose()?;
            let check = mc::ball_check(p.dimension, b, p.alpha, p.x, p.beta, p.outer, &settings)?;
            record.references = json!({ "exit_probability": check.radial.analytic });
            record.tables.push(check_table(&[&check.radial, &check.full]));
            record.results = to_json(&check);
        }
    }
    record.wall_time = started.elapsed().as_secs_f64();
    Ok(record)
}

fn check_table(checks: &[&mc::OracleCheck]) -> Table {
    let mut t = Table::new("checks", &["label", "analytic", "estimate", "std_error", "z_score"]);
    for c in checks {
        t.rows.push(vec![
            Cell::Text(c.label.clone()),
            Cell::Real(c.analytic),
            Cell::Real(c.estimate.mean),
            Cell::Real(c.estimate.std_error),
            Cell::Real(c.z_score),
        ]);
    }
    t
}

fn run_phi(p: &PhiParams, settings: &EnsembleSettings, record: &mut RunRecord) -> Result<()> {
    let d = PowerDrift::new(p.b, p.gamma)?;
    let mut t = Table::new("phi", &["x", "ln_phi", "phi", "ln_phi_asymptotic"]);
    for &x in &p.points {
        let ln = match p.dimension {
            Some(dim) => analytic::ln_phi_radial(&d, dim, x)?,
            None => analytic::ln_phi(&d, x)?,
        };
        let asym = match p.dimension {
            Some(_) => f64::NAN,
            None => analytic::ln_phi_asymptotic(&d, x)?,
        };
        t.rows.push(vec![Cell::Real(x), Cell::Real(ln), Cell::Real(ln.exp()), Cell::Real(asym)]);
    }
    let exact = analytic::hitting_prob_up(&d, p.alpha, p.x, p.beta, p.dimension)?;
    record.references = json!({ "exit_probability": exact.value });
    let mut results = json!({
        "exit_probability": to_json(&exact),
        "points": p.points.len(),
    });
    if p.monte_carlo {
        if p.dimension.is_some() {
            return Err(Error::config("phi.monte_carlo", "simulation uses the interval process only"));
        }
        let check = mc::hitting_check(d, p.alpha, p.x, p.beta, settings)?;
        record.tables.push(check_table(&[&check.coarse, &check.fine]));
        results["monte_carlo"] = to_json(&check);
    }
    record.tables.push(t);
    record.results = results;
    Ok(())
}

fn run_classify(p: &ClassifyParams, record: &mut RunRecord) -> Result<()> {
    let d = PowerDrift::new(p.b, p.gamma)?;
    let verdict = if p.dimension == 1 {
        analytic::classify_1d(&d, p.c)?
    } else {
        let lower = PowerDrift::new(p.b_minus.unwrap_or(p.b), p.gamma_minus.unwrap_or(p.gamma))?;
        let bounds = RadialBounds::new(d, lower)?;
        let shape = match p.shape {
            ShapeKind::Ball => Shape::Ball { radius: p.rad_plus },
            ShapeKind::Star => Shape::StarBody {
                rad_minus: p.rad_minus,
                rad_plus: p.rad_plus,
            },
        };
        let domain = DomainSpec::new(p.dimension, shape, GrowthFunction::canonical(p.c, p.gamma)?)?;
        analytic::classify_multid(&bounds, &domain, p.c, p.f_energy_finite)?
    };
    let crit = analytic::criterion(&d, p.c);
    record.references = json!({ "criterion": crit });
    record.results = json!({
        "verdict": to_json(&verdict),
        "criterion": crit,
        "margin": verdict.margin,
        "liminf_constant": analytic::liminf_constant(&d, p.c).ok(),
        "unconstrained_growth": to_json(&analytic::unconstrained_growth_order(p.gamma)?),
    });
    Ok(())
}

fn run_dichotomy(p: &DichotomyParams, settings: &EnsembleSettings, record: &mut RunRecord) -> Result<()> {
    let d = PowerDrift::new(p.b, p.gamma)?;
    record.warnings.extend(preflight_warnings(&record.config));
    let mut cases = Vec::new();
    let mut refs = Vec::new();
    let mut tracks = Table::new("tracks", &["c", "path_id", "t", "returns"]);
    for &c in &p.c {
        let report = mc::dichotomy_experiment(d, c, p.horizon_exponent, settings)?;
        for (id, counts) in report.returns.iter().enumerate() {
            for (j, &r) in counts.iter().enumerate() {
                tracks.rows.push(vec![
                    Cell::Real(c),
                    Cell::Int(id as u64),
                    Cell::Real(if j == 0 { 0.0 } else { (j as f64).exp() }),
                    Cell::Int(r),
                ]);
            }
        }
        refs.push(json!({ "c": c, "criterion": analytic::criterion(&d, c), "verdict": to_json(&report.analytic) }));
        cases.push(json!({
            "c": c,
            "empirical": to_json(&report.empirical),
            "analytic": to_json(&report.analytic.classification),
            "agrees": report.agrees(),
            "returning_fraction": report.returning_fraction,
            "silent_fraction": report.silent_fraction,
            "escaping_fraction": report.escaping_fraction,
        }));
    }
    record.references = Value::Array(refs);
    record.results = json!({ "cases": cases });
    record.tracks = Some(tracks);
    Ok(())
}

/// Warnings about run size, computed from the configuration alone.
pub fn preflight_warnings(config: &ExperimentConfig) -> Vec<String> {
    let (Some(p), Some(dt), Some(n)) = (&config.dichotomy, config.grid.dt, config.grid.n_paths) else {
        return Vec::new();
    };
    let horizon = (p.horizon_exponent as f64).exp();
    let steps = horizon / dt * n as f64 * p.c.len() as f64;
    if steps > STEP_WARNING {
        vec![format!(
            "dichotomy: about {steps:.3e} Euler steps (t up to {horizon:.3e}, dt = {dt}, {n} paths, {} cases)",
            p.c.len()
        )]
    } else {
        Vec::new()
    }
}

fn track_rows(
    paths: &[PathOutcome],
    window: [f64; 2],
    mut row: impl FnMut(u64, &TrackSample) -> Vec<Cell>,
) -> Vec<Vec<Cell>> {
    let mut rows = Vec::new();
    for p in paths {
        for s in p.ratio_track.iter().flatten() {
            if s.t >= window[0] && s.t <= window[1] {
                rows.push(row(p.path_id, s));
            }
        }
    }
    rows
}

fn run_liminf(p: &LiminfParams, settings: &EnsembleSettings, record: &mut RunRecord) -> Result<()> {
    let d = PowerDrift::new(p.b, p.gamma)?;
    let predicted = analytic::liminf_constant(&d, p.c)?;
    let mut s = *settings;
    s.horizon = p.window[1];
    let plan = SamplingPlan {
        ratio: p.sampling_ratio,
        ..SamplingPlan::default()
    };
    let paths = mc::moving_domain_ensemble(d, GrowthFunction::canonical(p.c, p.gamma)?, &s, plan)?;
    let report = mc::growth_report(&paths, (p.window[0], p.window[1]), &[])?;
    let lowest = report.per_path_min_ratio.iter().copied().fold(f64::INFINITY, f64::min);
    record.references = json!({ "liminf_constant": predicted });
    record.results = json!({
        "median_min_ratio": mc::median(&report.per_path_min_ratio),
        "lowest_min_ratio": lowest,
        "report": to_json(&report),
    });
    let mut t = Table::new("tracks", &["path_id", "t", "ratio"]);
    t.rows = track_rows(&paths, p.window, |id, s| {
        vec![Cell::Int(id), Cell::Real(s.t), Cell::Real(s.ratio)]
    });
    record.tracks = Some(t);
    Ok(())
}

fn run_growth(p: &GrowthParams, settings: &EnsembleSettings, record: &mut RunRecord) -> Result<()> {
    let d = PowerDrift::new(p.b, p.gamma)?;
    let q0 = match p.growth {
        GrowthFunction::Power { l } => analytic::deviation_exponent_q0(p.gamma, l).ok(),
        _ => None,
    };
    let q = if p.q_candidates.is_empty() {
        q0.map(|q| vec![q, q + 0.1]).unwrap_or_default()
    } else {
        p.q_candidates.clone()
    };
    let mut s = *settings;
    s.horizon = p.window[1];
    let plan = SamplingPlan {
        ratio: p.sampling_ratio,
        ..SamplingPlan::default()
    };
    let paths = mc::moving_domain_ensemble(d, p.growth, &s, plan)?;
    let report = mc::growth_report(&paths, (p.window[0], p.window[1]), &q)?;
    record.references = json!({ "q0": q0 });
    record.results = json!({
        "median_deviation_slope": mc::median(&report.per_path_slope),
        "mean_ratio": to_json(&report.mean_ratio),
        "report": to_json(&report),
    });
    let mut t = Table::new("tracks", &["path_id", "t", "deviation", "q0_reference"]);
    t.rows = track_rows(&paths, p.window, |id, s| {
        vec![
            Cell::Int(id),
            Cell::Real(s.t),
            Cell::Real(s.deviation),
            Cell::Real(q0.map_or(f64::NAN, |q| s.t.powf(q))),
        ]
    });
    record.tracks = Some(t);
    Ok(())
}

/// Write `tracks.csv` from the record. Records without tracks produce a
/// notice and no file.
pub fn emit_plot_data(record: &RunRecord, dir: &Path) -> Result<Option<PathBuf>> {
    match &record.tracks {
        Some(t) if !t.rows.is_empty() => {
            fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.csv", t.name));
            fs::write(&path, t.to_csv())?;
            Ok(Some(path))
        }
        _ => {
            eprintln!("notice: `{}` run has no tracks to emit", record.kind.name());
            Ok(None)
        }
    }
}

/// Write `summary.json`, `timing.json`, `config.toml`, the result tables and
/// the plot data into `dir`. Returns the written paths.
pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summary = serde_json::to_string_pretty(record).expect("record serializes") + "\n";
    let path = dir.join("summary.json");
    fs::write(&path, summary)?;
    written.push(path);
    let path = dir.join("timing.json");
    fs::write(&path, json!({ "wall_time_seconds": record.wall_time }).to_string() + "\n")?;
    written.push(path);
    let path = dir.join("config.toml");
    fs::write(&path, record.config.to_toml_string()?)?;
    written.push(path);
    for t in &record.tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.to_csv())?;
        written.push(path);
    }
    written.extend(emit_plot_data(record, dir)?);
    Ok(written)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Parameter(_) => 2,
        _ => 3,
    }
}

/// Load, resolve and run one subcommand, then write its outputs.
pub fn execute(command: &Command) -> Result<(RunRecord, PathBuf)> {
    let kind = command.kind();
    let args = command.args();
    let config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let config = config.resolve(kind, args)?;
    let dir = config
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("growdiff-out").join(kind.name()));
    let record = run(&config)?;
    write_outputs(&record, &dir)?;
    Ok((record, dir))
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok((record, dir)) => {
            for w in &record.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}: results in {}", record.kind.name(), dir.display());
            println!(
                "{}",
                serde_json::to_string(&record.results).expect("results serialize")
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(kind: Kind, text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(text)?.resolve(kind, &RunArgs::default())
    }

    #[test]
    fn classify_example() {
        let c = resolved(Kind::Classify, "[classify]\nb = 1.0\ngamma = 0.0\nc = 0.4\n").unwrap();
        let r = run(&c).unwrap();
        assert_eq!(r.results["verdict"]["classification"], "recurrent");
        assert!((r.results["margin"].as_f64().unwrap() + 0.2).abs() < 1e-12);
        assert!(r.tracks.is_none());
    }

    #[test]
    fn unknown_field_is_a_config_error() {
        let e = resolved(Kind::MgfCheck, "[mgf]\nbeta = 2.0\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn failing_field_is_named() {
        let e = resolved(Kind::MgfCheck, "[mgf]\nx = 3.0\nbeta = 2.0\n").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "mgf.x"), "{e}");
        let e = resolved(Kind::Liminf, "[liminf]\nc = 0.3\n").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "liminf.c"), "{e}");
        let e = resolved(Kind::Liminf, "[grid]\nhorizon = 5.0\n").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "grid.horizon"), "{e}");
        let e = resolved(Kind::Growth, "[growth]\ngamma = 0.5\ngrowth = { kind = \"power\", l = 3.0 }\n")
            .unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "growth.growth"), "{e}");
    }

    #[test]
    fn kind_must_match_subcommand() {
        let e = resolved(Kind::Phi, "kind = \"mgf-check\"\n").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "kind"));
    }

    #[test]
    fn overrides_and_snapshot_round_trip() {
        let args = RunArgs {
            seed: Some(99),
            workers: Some(2),
            ..RunArgs::default()
        };
        let c = ExperimentConfig::from_toml_str("[grid]\nn_paths = 500\n[phi]\nb = 2.0\n[mgf]\nx = 1.5\n")
            .unwrap()
            .resolve(Kind::Phi, &args)
            .unwrap();
        assert_eq!(c.grid.seed, Some(99));
        assert_eq!(c.grid.workers, Some(2));
        assert_eq!(c.grid.n_paths, Some(500));
        assert!(c.mgf.is_none());
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back.resolve(Kind::Phi, &RunArgs::default()).unwrap(), c);
    }

    #[test]
    fn dichotomy_warns_on_large_step_counts() {
        let c = resolved(Kind::Dichotomy, "[grid]\nn_paths = 2\ndt = 1.0\n[dichotomy]\nhorizon_exponent = 3\n")
            .unwrap();
        assert!(preflight_warnings(&c).is_empty());
        assert!(run(&c).unwrap().warnings.is_empty());
        let c = resolved(Kind::Dichotomy, "[grid]\ndt = 1e-6\n[dichotomy]\nhorizon_exponent = 20\n").unwrap();
        let w = preflight_warnings(&c);
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("Euler steps"), "{}", w[0]);
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let mut t = Table::new("x", &["path_id", "t"]);
        t.rows.push(vec![Cell::Int(3), Cell::Real(0.1)]);
        let csv = t.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "# columns: path_id,t");
        let v: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 0.1);
    }

    #[test]
    fn plot_data_without_tracks_is_a_no_op() {
        let c = resolved(Kind::Classify, "").unwrap();
        let r = run(&c).unwrap();
        let dir = std::env::temp_dir().join("growdiff-no-tracks");
        assert_eq!(emit_plot_data(&r, &dir).unwrap(), None);
    }

    #[test]
    fn bad_arguments_exit_with_two() {
        assert_eq!(main_with_args(["growdiff", "nonsense"]), 2);
        assert_eq!(main_with_args(["growdiff", "mgf", "--config", "/nonexistent/x.toml"]), 2);
    }
}
