use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A series, quadrature or iteration failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A target value cannot be attained by the requested inversion.
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// A moment-constrained problem has no solution.
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
