use qst_core::QstError;
use qst_mirror::MirrorError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, ExpError>;

#[derive(Error, Debug)]
pub enum ExpError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error(transparent)]
    Core(QstError),
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("output encoding: {0}")]
    Encode(String),
}

impl From<QstError> for ExpError {
    fn from(e: QstError) -> Self {
        match e {
            QstError::Resource { .. } => ExpError::Resource(e.to_string()),
            e => ExpError::Core(e),
        }
    }
}

impl ExpError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        ExpError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for resource
    /// limits, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) => 2,
            ExpError::Resource(_) => 3,
            ExpError::Mirror(MirrorError::Lattice(_)) => 2,
            ExpError::Mirror(MirrorError::DenseCap { .. }) => 3,
            _ => 1,
        }
    }
}
