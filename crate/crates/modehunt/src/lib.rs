//! Mode detection for one-dimensional signals without presmoothing.
//!
//! A signal is represented as a step function on an equipartition of `[0, 1]`.
//! Its *k*-th Kolmogorov signature is the distance, in the Kolmogorov metric
//! (sup norm of antiderivatives), from the signal to the set of functions with
//! at most `k` inner local maxima. The descending sequence of positive
//! signatures encodes how much each mode costs to remove, and thresholding it
//! against a concentration bound yields mode-count estimates with controlled
//! over- and underestimation probabilities.
//!
//! The crate provides:
//!
//! * [`signal`] — the step-signal representation, Kolmogorov and sup
//!   distances, and exact mode counting;
//! * [`kolmsig`] — the `O(n log n)` merge sweep computing the full Kolmogorov
//!   signature sequence;
//! * [`tautstring`] — taut strings through the tube around the antiderivative;
//!   the mode-minimizing property of their derivatives makes them an
//!   independent oracle for the signatures;
//! * [`persistence`] — sublevel-set persistence of step signals and the
//!   sup-norm signatures derived from it;
//! * [`stats`] — deviation bounds, signature thresholds, confidence bands and
//!   mode-count confidence intervals;
//! * [`harness`] — seeded signal generators, noise models and Monte Carlo
//!   experiments.

pub mod harness;
pub mod kolmsig;
pub mod persistence;
pub mod signal;
pub mod stats;
pub mod tautstring;

use thiserror::Error;

/// Errors reported by signature computations and statistical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A signal violated a structural invariant (empty, NaN, infinite value).
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    /// A numeric argument was outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A ratio of signatures was requested where the denominator vanishes.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// NaN-rejecting sign checks used by the argument validators.
pub(crate) fn is_positive(x: f64) -> bool {
    x > 0.0
}

pub(crate) fn is_nonnegative(x: f64) -> bool {
    x >= 0.0
}

pub(crate) fn in_open_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}
