use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] omnivr_core::Error),

    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("PNG codec error: {0}")]
    Codec(#[from] image::ImageError),

    #[error("unsupported pixel layout: {0}")]
    UnsupportedLayout(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid input images:\n{}", .0.join("\n"))]
    InvalidInputs(Vec<String>),

    #[error("manifest record {id}: {reason}")]
    Manifest { id: String, reason: String },

    #[error("requested raster {width}x{height} exceeds the 4096x4096 pixel budget")]
    TooLarge { width: usize, height: usize },

    #[error("invalid OMNIVR_THREADS value {0:?}")]
    Threads(String),

    #[error("server: {0}")]
    Server(#[source] std::io::Error),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    /// True for errors caused by bad argument values rather than IO.
    pub fn is_usage(&self) -> bool {
        use omnivr_core::Error as E;
        matches!(
            self,
            Error::Core(
                E::InvalidZoom(_)
                    | E::NonFiniteAngle(_)
                    | E::InvalidCamera(_)
                    | E::UnsupportedFactor(_)
            ) | Error::Threads(_)
                | Error::TooLarge { .. }
        )
    }
}
