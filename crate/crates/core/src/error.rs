//! Error type shared by every module.

use thiserror::Error;

/// Failures reported by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The operation is undefined for the given state (e.g. an annihilated state).
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// A configured size or rank budget would be exceeded.
    #[error("resource limit exceeded: {what} = {requested} > {limit}")]
    ResourceLimit {
        /// Quantity that hit the limit.
        what: &'static str,
        /// Requested amount.
        requested: u128,
        /// Configured maximum.
        limit: u128,
    },
}

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
