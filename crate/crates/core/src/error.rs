use num_complex::Complex64;
use thiserror::Error;

use crate::prony::ExpModeSet;

/// Errors raised by the decay-law library.
#[derive(Debug, Clone, Error)]
pub enum DecayError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    /// The nonrelativistic limit gamma -> 1 is outside the model.
    #[error("excluded regime: {0}")]
    ExcludedRegime(String),

    #[error("time {t} lies outside the exponential window")]
    OutOfWindow { t: f64 },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The fitter ran out of restarts without meeting its tolerance.
    #[error("fit did not converge (best rmse {rmse:e})")]
    FitFailed {
        best: Box<ExpModeSet<f64>>,
        rmse: f64,
    },

    /// Quadrature did not reach the requested accuracy within its panel budget.
    #[error("quadrature precision not reached: estimate {estimate}, error {error:e}")]
    Precision { estimate: Complex64, error: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DecayError {
    fn from(e: std::io::Error) -> Self {
        DecayError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for DecayError {
    fn from(e: serde_json::Error) -> Self {
        DecayError::Parse(e.to_string())
    }
}

pub type Result<T, E = DecayError> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> DecayError {
    DecayError::Domain(msg.into())
}
