use thiserror::Error as ThisError;

/// Failure categories shared by every module.
#[derive(Debug, Clone, PartialEq, ThisError)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Discretisation parameters that cannot deliver the requested accuracy.
    #[error("configuration error: {0}")]
    Config(String),
    /// Poles or angles too close to a singular configuration.
    #[error("singularity: {0}")]
    Singularity(String),
    /// A numerical diagnostic tripped (blow-up, shock, failed solve).
    #[error("numerical diagnostic: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by invalid input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
