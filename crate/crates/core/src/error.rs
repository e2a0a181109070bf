use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value outside the mathematical domain of an operation (non-finite
    /// coordinates, non-positive ε, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent solver or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Arguments that are individually valid but cannot be combined, such as
    /// densities on different grids or uncoupled ensembles.
    #[error("usage error: {0}")]
    Usage(String),

    /// A linear solve broke down.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
