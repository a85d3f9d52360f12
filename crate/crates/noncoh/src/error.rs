//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by spec construction, numeric routines and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// A channel spec violates its invariants (negative spectrum, bad
    /// parameter range, inconsistent separable factorization, ...).
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// A tabulated spectrum is too coarse for the requested lag.
    #[error("resolution: {0}")]
    Resolution(String),

    /// An input violates an operation precondition (peak constraint,
    /// d outside the probability simplex, zero d on a path that needs
    /// d > 0, ...).
    #[error("domain: {0}")]
    Domain(String),

    /// The requested computation is too large to evaluate exactly
    /// (pattern space, input support).
    #[error("capacity: {0}")]
    Capacity(String),

    /// A numeric routine failed to converge or produced non-finite
    /// values. Carries the best value found when one exists.
    #[error("numeric: {msg}")]
    Numeric { msg: String, best: Option<f64> },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            msg: msg.into(),
            best: None,
        }
    }

    pub(crate) fn numeric_with_best(msg: impl Into<String>, best: f64) -> Self {
        Error::Numeric {
            msg: msg.into(),
            best: Some(best),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
