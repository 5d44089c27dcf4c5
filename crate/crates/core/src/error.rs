use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Sizes or grid tags of the inputs do not match.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("singular system in {what} (condition estimate {condition:.3e})")]
    Singular { what: &'static str, condition: f64 },

    /// The simulation left the admissible neighborhood.
    #[error("simulation terminated at t = {t}: {reason}")]
    Guard { t: f64, reason: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
