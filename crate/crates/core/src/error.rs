use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncation { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("label byte {value} at record {index} is not a digit")]
    LabelRange { index: usize, value: u8 },

    #[error("digit {0} has no samples")]
    EmptyClass(u8),

    #[error("window of side {side} does not fit a {width}x{height} image")]
    Window {
        side: usize,
        width: usize,
        height: usize,
    },

    #[error("digit {digit}: no comparands to score against")]
    EmptyPool { digit: u8 },

    #[error("similarity {value} lies outside [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("digit {digit}: exemplar {source_index} has no weight")]
    Key { digit: u8, source_index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model fingerprint {model} does not match configuration fingerprint {config}")]
    StaleModel { model: String, config: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
