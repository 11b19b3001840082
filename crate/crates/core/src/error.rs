use std::path::PathBuf;

/// Errors produced by the simulation, surrogate and evaluation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {what} at flat index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("integration blew up at step {step} ({field} field, flat index {index})")]
    IntegrationBlowUp {
        step: u64,
        field: &'static str,
        index: usize,
    },

    #[error("reservoir construction failed: {0}")]
    Reservoir(String),

    #[error("ridge system is singular (pivot {pivot} at row {row}); use a regularization coefficient > 0")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("autoregressive rollout diverged at step {step}")]
    Divergence { step: usize },

    #[error("perturbation collapsed to zero norm after step {step}")]
    DegeneratePerturbation { step: usize },

    #[error("corrupt file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("missing file in inventory: {0}")]
    Inventory(PathBuf),

    #[error("incompatible format version: found {found:?}, expected {expected:?}")]
    VersionMismatch { found: String, expected: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad numbers rather than bad inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::IntegrationBlowUp { .. }
                | Error::SingularSystem { .. }
                | Error::Divergence { .. }
                | Error::DegeneratePerturbation { .. }
                | Error::Reservoir(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
