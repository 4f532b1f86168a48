use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A point or argument fell outside the domain an operation is defined on.
    #[error("domain error: {what} = {value} lies outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    /// An argument violated a precondition (zero order, non-positive lambda, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The design density is inconsistent with its declared bounds or non-positive.
    #[error("density error: {0}")]
    Density(String),
    /// The requested discretization exceeds the configured size cap.
    #[error("size error: {nodes} nodes exceed the cap of {cap}")]
    Size { nodes: usize, cap: usize },
    /// A factorization failed even after jitter escalation.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Every tail coefficient was below the numerical floor.
    #[error("decay classification failed: {0}")]
    ClassificationFailed(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
