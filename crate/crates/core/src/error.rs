use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A profile or configuration failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The operation expects a differently shaped matrix or profile.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A formula was evaluated outside its domain of validity.
    #[error("outside formula domain: {0}")]
    Domain(String),

    /// An argument violates a precondition relating two inputs.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An iterative solver exhausted its iteration cap.
    #[error(
        "solver did not converge after {iterations} iterations \
         (best estimate {best_estimate}, residual {residual:e})"
    )]
    Convergence {
        best_estimate: f64,
        residual: f64,
        iterations: usize,
    },

    /// A Monte Carlo trial failed; wraps the underlying error.
    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    /// Tail exponent fit could not be performed.
    #[error("tail fit failed: {reason} (usable thresholds: {usable}, required: {required})")]
    Fit {
        reason: String,
        usable: usize,
        required: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error (or the error wrapped by a trial) is a solver
    /// non-convergence.
    pub fn is_convergence(&self) -> bool {
        match self {
            Error::Convergence { .. } => true,
            Error::Trial { source, .. } => source.is_convergence(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
