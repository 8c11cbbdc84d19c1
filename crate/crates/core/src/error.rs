use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes of two operands do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A matrix that has to be inverted is numerically singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Inputs violate an identity that holds in exact arithmetic,
    /// e.g. tr(G⁻¹) ≤ the rank-one trace reduction.
    #[error("numerically inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("spec file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
