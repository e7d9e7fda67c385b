//! Crate-wide error type.

use std::path::PathBuf;

use crate::cartpole::State;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A state with a non-finite component reached the dynamics.
    #[error("invalid state (non-finite component): {0:?}")]
    InvalidState(State),

    #[error("cannot split a dataset of {len} transitions")]
    CannotSplit { len: usize },

    /// An input collection is below the documented minimum size.
    #[error("{what}: got {len}, need at least {min}")]
    TooSmall {
        what: &'static str,
        len: usize,
        min: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Malformed text input; `line` and `column` are 1-based.
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("nothing to plot: {0}")]
    EmptyPlot(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        line: usize,
        column: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            column,
            message: message.into(),
        }
    }
}
