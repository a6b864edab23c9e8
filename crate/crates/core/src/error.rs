use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent user input.
    #[error("input error: {0}")]
    Input(String),

    /// A numerical routine failed to reach its convergence target.
    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefixes the message with `ctx`, keeping the error kind.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::Input(msg) => Error::Input(format!("{ctx}: {msg}")),
            Error::Numeric { message, residual } => Error::Numeric {
                message: format!("{ctx}: {message}"),
                residual,
            },
            io @ Error::Io { .. } => io,
        }
    }

    /// Process exit status for this error: 1 for input/io problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Io { .. } => 1,
            Error::Numeric { .. } => 2,
        }
    }
}
