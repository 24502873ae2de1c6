use thiserror::Error;

/// Errors raised by the tensor, MPS and TEBD layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Tensor shapes do not line up for the requested operation.
    #[error("shape error: {0}")]
    Shape(String),
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    Input(String),
    /// A factorization failed to converge or produced non-finite output.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A requested problem size exceeds a configured memory guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! shape_err {
    ($($arg:tt)*) => { $crate::error::Error::Shape(format!($($arg)*)) };
}

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::error::Error::Input(format!($($arg)*)) };
}

pub(crate) use input_err;
pub(crate) use shape_err;
