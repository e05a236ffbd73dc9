use std::io;

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A function argument violated its precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An experiment configuration was rejected.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(format!($($arg)*))
    };
}
pub(crate) use invalid;
