use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical blow-up at t = {t}: non-finite values in the profile")]
    NumericalBlowup { t: f64 },

    #[error(
        "T_end = {t_end} exceeds the wrap-around validity horizon T_valid = {t_valid:.3}; \
         enlarge L or pass --override-horizon"
    )]
    HorizonExceeded { t_end: f64, t_valid: f64 },

    #[error(
        "quadrature unresolved: error estimate {estimate:.3e} exceeds 5% of |value| = {magnitude:.3e}; \
         try quad_resolution >= {suggested}"
    )]
    Accuracy {
        estimate: f64,
        magnitude: f64,
        suggested: usize,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NumericalBlowup { .. } => "numerical-blowup",
            Error::HorizonExceeded { .. } => "horizon-exceeded",
            Error::Accuracy { .. } => "accuracy",
            Error::Resource(_) => "resource",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}
