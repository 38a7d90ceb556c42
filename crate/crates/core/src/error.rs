use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the model's domain (negative variance, empty block, ...).
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The configured operating point breaks a model assumption, e.g. the link margin.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The requested quantity is not defined in the current regime.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical routine did not converge: {0}")]
    Convergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
