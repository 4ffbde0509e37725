use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("DTW band {band} cannot reach the terminal cell for lengths {len_a} and {len_b}")]
    BandInfeasible {
        band: usize,
        len_a: usize,
        len_b: usize,
    },

    #[error("initial batch has {got} items, need at least k*p = {need}")]
    InsufficientBatch { got: usize, need: usize },

    #[error("invalid item: {0}")]
    InvalidItem(String),

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("item {0:?} has no label")]
    MissingLabel(String),

    #[error("need at least {need} items, got {got}")]
    TooFewItems { got: usize, need: usize },

    #[error("sequence of length {len} exceeds the brute-force limit of {max}")]
    TooLong { len: usize, max: usize },

    #[error("snapshot sink failed after {snapshots} snapshots and {items} items: {source}")]
    SinkFailure {
        items: u64,
        snapshots: u64,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
