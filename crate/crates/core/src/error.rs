use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported or corrupt image data: {0}")]
    Format(String),

    /// A precondition on the shape or encoding of an input was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Every pixel was masked out, so there is nothing to measure.
    #[error("statistic requested over an empty domain")]
    EmptyDomain,

    #[error("image too small: {0}")]
    Size(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error at line {line}: {msg}")]
    Validation { line: usize, msg: String },

    #[error("ids missing from score store: {}", .0.join(", "))]
    Lookup(Vec<String>),

    #[error("predictor protocol error: {msg} (line: {line:?})")]
    Protocol { line: String, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data rather than bad usage.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Parameter(_) | Error::Contract(_))
    }
}
