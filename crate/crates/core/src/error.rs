use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("size limit exceeded: {what} = {got}, limit {limit}")]
    SizeLimit {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("index {index} out of range for {what} (len {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("all-zero matrix passed to truncated SVD")]
    ZeroMatrix,

    #[error("gate is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("degenerate state: {0}")]
    DegenerateState(&'static str),

    #[error("projection onto outcome {outcome} at site {site} has probability {probability:e}")]
    ZeroProbability {
        site: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("linear algebra kernel failed: {0}")]
    Kernel(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
