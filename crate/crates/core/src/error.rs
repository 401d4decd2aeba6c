use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GovError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error in {path}: {detail}")]
    Schema { path: PathBuf, detail: String },

    #[error("no votes")]
    NoVotes,

    #[error("unknown poll {0}")]
    UnknownPoll(u64),

    #[error("degenerate regressor")]
    DegenerateRegressor,

    #[error("degenerate instrument")]
    DegenerateInstrument,

    #[error("collinear augmentation")]
    CollinearAugmentation,

    #[error("insufficient observations: have {have}, need at least {need}")]
    Insufficient { have: usize, need: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl GovError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GovError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        GovError::Schema {
            path: path.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = GovError> = std::result::Result<T, E>;
