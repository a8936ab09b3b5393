use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("accuracy error: {message} (estimate {estimate:e})")]
    Accuracy { message: String, estimate: f64 },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("diagnostic error: {0}")]
    Diagnostic(String),
}

impl Error {
    /// True for input-contract violations (as opposed to numerical failures).
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::Dimension(_) | Error::Domain(_) | Error::Precondition(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
