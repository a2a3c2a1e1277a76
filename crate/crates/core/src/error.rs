use thiserror::Error;

/// Errors raised by state construction, protocol evaluation and the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix or amplitude vector failed a state invariant (normalization, Hermiticity, positivity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Two objects that must share a particle number or dimension do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter is outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request lies outside the parameter regime the construction supports.
    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// An integrator, eigen-solver or quadrature failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The input does not satisfy the hypotheses of an asymptotic check.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
