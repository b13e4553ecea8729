use thiserror::Error;

#[derive(Debug, Error)]
pub enum QdError {
    #[error("{0} is not a supported prime (need 2 <= p < 2^31)")]
    InvalidPrime(u32),
    #[error("quadric dimension {0} outside the supported range 1..=4")]
    DimensionOutOfRange(usize),
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("modules live over different rings")]
    RingMismatch,
    #[error("polynomial entry has the wrong degree: {0}")]
    DegreeMismatch(String),
    #[error("invalid partition {0:?} for rank {1}")]
    InvalidPartition(Vec<usize>, usize),
    #[error("internal degree bound exhausted: {0}")]
    BoundExhausted(String),
    #[error("interval-valued table where an exact one is required")]
    InexactTable,
    #[error("tables of different dimensions ({0} vs {1})")]
    TableDimension(usize, usize),
    #[error("exact sequence check failed: {0}")]
    NotExact(String),
    #[error("resource budget exceeded for n={n}, p={p}")]
    BudgetExceeded { n: usize, p: u32 },
    #[error("bundle expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{0}")]
    Unsupported(String),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = QdError> = std::result::Result<T, E>;
