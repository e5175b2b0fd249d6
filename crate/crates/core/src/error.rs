use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("group order {order} exceeds the enumeration bound {bound}")]
    BoundExceeded { order: usize, bound: usize },

    #[error("unsupported ordering: {0}")]
    UnsupportedOrder(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("input is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("not a state: {0}")]
    NotState(String),

    #[error("mode {mode} outside band [-{band}, {band}]")]
    OutOfBand { mode: i64, band: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
