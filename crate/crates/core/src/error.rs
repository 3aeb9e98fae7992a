use thiserror::Error;

/// Error type shared by every module of the lab.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition was violated (point outside the domain of
    /// a formula, invalid parameter range, empty target set, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An inconsistent combination of mesh, weight, topology or experiment
    /// settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// A linear solve or another numerical step failed to reach its
    /// guaranteed accuracy.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A stochastic estimate could not be formed from the samples produced
    /// within the configured budget.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn insufficient(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }
}
