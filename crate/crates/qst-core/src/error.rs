//! Error type shared by every engine in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QstError>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum QstError {
    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),
    #[error("{0} is not quadratic in fermions; use the many-body engine")]
    NotQuadratic(String),
    #[error("malformed input matrix: {0}")]
    MalformedInput(String),
    #[error("no transferring mode: {0}")]
    NoTransferringMode(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("resource limit exceeded: {what} (needs about {required_bytes} bytes, cap {cap})")]
    Resource {
        what: String,
        required_bytes: u64,
        cap: usize,
    },
}
