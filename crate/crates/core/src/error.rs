use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate hull: need at least 3 vertices, got {0}")]
    DegenerateHull(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario generation failed after {attempts} attempts: {hint}")]
    GenerationFailure { attempts: usize, hint: String },

    #[error("parse error in {path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    #[error("unsupported scenario format version {found} (supported: {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
