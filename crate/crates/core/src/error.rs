//! Error types shared by the simulation core.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Error raised by the simulation core.
///
/// `Domain` covers violated mathematical preconditions (negative mean photon
/// numbers, overlapping mode sets, unnormalized states, ...). `Config` covers
/// rejected configuration values and always names the offending field.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration field holds an unusable value. `field` is the full
    /// dotted path of the offending entry.
    #[error("config error: {field}: {reason}")]
    Config { field: String, reason: String },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
