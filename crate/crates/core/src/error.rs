use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("non-finite integrand value {value} at abscissa {x}")]
    NonFiniteIntegrand { x: f64, value: f64 },

    #[error("{what} did not converge (last residual {residual:e})")]
    NotConverged { what: String, residual: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn not_converged(what: impl Into<String>, residual: f64) -> Self {
        Error::NotConverged { what: what.into(), residual }
    }

    /// Process exit code for the CLI: 2 validation, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Validation(_) | Error::Parse { .. } => 2,
            Error::NonFiniteIntegrand { .. } | Error::NotConverged { .. } | Error::Singular(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
