use thiserror::Error;

/// Errors raised while building or validating a construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A user-supplied parameter is outside its admissible region.
    #[error("parameter rejected: {0}")]
    Parameter(String),

    /// The disk layout could not be produced or failed validation.
    #[error("construction failed: {0}")]
    Construction(String),

    /// An enumeration would exceed the configured size cap.
    #[error("enumeration of {requested} items exceeds the cap of {cap}")]
    Size { requested: u128, cap: u128 },

    /// A numerical certificate did not hold.
    #[error("numerical check failed: {0}")]
    Numerical(String),

    /// Input that cannot be used (too few scales, empty sample, ...).
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by the caller's parameters rather than by the computation.
    pub fn is_rejection(&self) -> bool {
        matches!(self, Error::Parameter(_) | Error::Size { .. } | Error::Input(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
