use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied a value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Configuration or invocation problem detectable before any numerics run.
    #[error("usage error: {0}")]
    Usage(String),

    /// An algorithm failed to converge, lost positivity, or lost precision.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A search or schedule ended without meeting its target.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code following the CLI contract: 2 for usage, 3 for numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Usage(_) | Error::Serde(_) => 2,
            Error::Numerical(_) | Error::Infeasible(_) => 3,
            Error::Io { .. } => 2,
        }
    }
}
