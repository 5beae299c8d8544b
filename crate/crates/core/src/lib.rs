//! Diffusions with drift reflected in a growing domain.
//!
//! The crate pairs closed-form results for the one-dimensional process on
//! `(1, f(t))` (scale function, exit probabilities, hitting-time transforms,
//! recurrence/transience classification, growth constants) with a Monte Carlo
//! engine that simulates the reflected process and checks those results.
//!
//! * [`model`]: drifts, growth functions, domain geometry.
//! * [`analytic`]: exact formulas and decision predicates.
//! * [`sde`]: Euler paths with reflection at fixed and moving barriers.
//! * [`mc`]: ensembles, estimators, and the long-time experiments.
//! * [`cli`]: config-driven runner behind the `growdiff` binary.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod mc;
pub mod model;
pub mod sde;

pub use error::{Error, Result};
