use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("shape has an empty foreground")]
    EmptyForeground,

    #[error("shape has no boundary pixels")]
    EmptyBoundary,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radial percentile is zero; scale factor is undefined")]
    DegenerateScale,

    #[error("k = {k} exceeds the number of distinct colors ({distinct})")]
    TooManyClusters { k: usize, distinct: usize },

    #[error("not enough samples: need at least {needed}, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    #[error("bin edges must be strictly increasing")]
    UnsortedEdges,

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn file(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::File {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
