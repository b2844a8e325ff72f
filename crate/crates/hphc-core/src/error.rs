use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A request exceeded a configured size bound for exact computation.
    #[error("{what} = {requested} exceeds the configured bound {bound}")]
    SizeBound {
        what: &'static str,
        requested: u64,
        bound: u64,
    },

    /// A step-probability profile violated 0 < p_j <= 1/2 with min p_j < 1/2.
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
