use thiserror::Error;

/// Error type shared by every operator in the crate.
#[derive(Debug, Clone, Error)]
pub enum FracError {
    /// Input violates a mathematical precondition (exponent floor, sign
    /// constraints, convergence strip, integer orders where non-integer
    /// ones are required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Grid too small for the requested stencil, mismatched sample counts.
    #[error("size error: {0}")]
    Size(String),

    /// A numerical procedure failed (non-convergence, rank deficiency).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed textual input (generalized-polynomial expressions, CSV).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FracError>;

impl FracError {
    pub fn domain(msg: impl Into<String>) -> Self {
        FracError::Domain(msg.into())
    }
    pub fn size(msg: impl Into<String>) -> Self {
        FracError::Size(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        FracError::Numeric(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        FracError::Parse(msg.into())
    }
}
