use thiserror::Error;

/// Failures raised across the toolkit.
///
/// Validation-type errors (bad input) and numerical failures are kept apart
/// so the CLI can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("operation requires a fixed domain (motion is {0})")]
    NonFixedMotion(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge after {iterations} iterations (last change {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True when the error stems from bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Validation { .. }
                | Error::NonFixedMotion(_)
                | Error::InvalidArgument(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
