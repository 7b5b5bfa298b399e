use alloc::string::String;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input table has no rows or no feature columns")]
    EmptyTable,
    #[error("target column `{0}` not found in header")]
    MissingTargetColumn(String),
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("duplicate row id at row {0}")]
    DuplicateRowId(usize),
    #[error("cannot fit a local model to an empty region")]
    EmptyRegion,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear solve produced a non-finite solution")]
    NumericalFailure,
    #[error("centroid list is empty")]
    EmptyCentroidList,
    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("inverted segment range: {lo} > {hi}")]
    InvertedRange { lo: usize, hi: usize },
    #[error("insufficient data: need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("value/index tables are inconsistent with the requested reconstruction")]
    InconsistentTables,
    #[error("k = {k} exceeds the number of values ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("exhaustive oracle is limited to n <= {limit}, got {n}")]
    TooLargeForOracle { n: usize, limit: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("need at least two points")]
    TooFewPoints,
}

pub type Result<T> = core::result::Result<T, Error>;
