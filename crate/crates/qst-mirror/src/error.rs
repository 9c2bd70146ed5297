use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MirrorError {
    #[error("site {site} out of range for {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("pair index {index} out of range for a chain of {len} sites")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("asymmetry unavailable: {0}")]
    AsymmetryUnavailable(String),
    #[error("lattice: {0}")]
    Lattice(String),
    #[error("no route: {0}")]
    NoRoute(String),
    #[error("dense simulation of {n} qubits exceeds the cap of {cap}")]
    DenseCap { n: usize, cap: usize },
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, MirrorError>;
