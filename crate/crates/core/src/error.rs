use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mask dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch { expected: (u32, u32), actual: (u32, u32) },

    #[error("empty mask has no bbox")]
    EmptyMask,

    #[error("mask must be a single 8-connected component, found {0}")]
    MultipleComponents(usize),

    #[error("degenerate contour: {0}")]
    DegenerateContour(String),

    #[error("no interaction to encode")]
    NoInteraction,

    #[error("zoom-in requires a contour")]
    ZoomWithoutContour,

    #[error("converged: prediction already equals ground truth")]
    Converged,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),

    #[error(transparent)]
    Segmenter(#[from] crate::segmenter::SegmenterError),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
