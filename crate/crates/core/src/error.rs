use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unbalanced design: stimulus {stimulus} has {found} trials, expected {expected}")]
    Unbalanced {
        stimulus: usize,
        found: usize,
        expected: usize,
    },

    #[error("stimulus labels must be dense in [0, {n_s}): label {missing} never occurs")]
    MissingStimulus { missing: usize, n_s: usize },

    #[error("mixed response variants: {0}")]
    MixedVariant(String),

    #[error("metric {metric} cannot compare {variant} responses")]
    MetricMismatch {
        metric: &'static str,
        variant: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty dataset")]
    Empty,

    #[error("least-squares design is rank deficient: {0}")]
    RankDeficient(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
