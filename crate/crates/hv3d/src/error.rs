use std::io;
use std::path::PathBuf;

/// Errors produced by the loaders, kernels and the batch harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A raw YUV file whose byte count does not match the declared geometry.
    #[error(
        "{path}: expected {expected} bytes ({frames} frame(s) of {frame_bytes} bytes), found {actual}"
    )]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
        frames: usize,
        frame_bytes: usize,
    },

    #[error("4:2:0 frames need even dimensions, got {width}x{height}")]
    OddDimensions { width: usize, height: usize },

    #[error("{path}: {reason}")]
    PgmParse { path: PathBuf, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A caller-supplied value outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration (weights, geometry, override file) that fails validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("manifest: {0}")]
    Manifest(String),
}

impl Error {
    /// True for errors caused by malformed user input (flags, config files,
    /// manifests, distortion specs) rather than by I/O or scoring failures.
    /// The CLI maps these to exit code 2, everything else to exit code 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::InvalidConfig(_) | Error::Manifest(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
