use thiserror::Error;

/// Errors raised by the relay-selection library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs that must be keyed identically were not.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Power constraints cannot be met.
    #[error("constraint error: {0}")]
    Constraint(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
