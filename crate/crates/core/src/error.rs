use thiserror::Error;

use crate::config::ConfigError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input failed its range or consistency check.
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// Quadrature refinement ran out of budget before reaching the target.
    #[error(
        "quadrature did not converge: best estimate {best:e}, achieved relative tolerance {achieved:e} (target {target:e})"
    )]
    Convergence { best: f64, achieved: f64, target: f64 },

    /// An operation was called on a value that is missing a required stage.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("photon count accumulator saturated")]
    Saturation,

    #[error("shot-noise gap is undefined for a zero mean")]
    UndefinedGap,

    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Fails with a validation error unless `value` is finite and strictly positive.
pub(crate) fn ensure_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn ensure_non_negative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be >= 0, got {value}")))
    }
}
