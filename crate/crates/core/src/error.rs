use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Two objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// A construction could not be completed (e.g. degenerate random draws).
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Shorthand for returning `LabError::InvalidParameter` from a format string.
macro_rules! invalid {
    ($($arg:tt)*) => {
        return Err($crate::error::LabError::InvalidParameter(format!($($arg)*)))
    };
}
pub(crate) use invalid;
