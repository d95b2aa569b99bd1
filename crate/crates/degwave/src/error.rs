use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes:
/// configuration/input problems exit with 2, numerical failures with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("integrability failure: {0}")]
    Integrability(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("fit infeasible: {0}")]
    FitInfeasible(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Capacity(_) | Error::Integrability(_) => 3,
            _ => 2,
        }
    }
}
