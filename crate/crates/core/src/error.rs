use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unsupported number of objectives: {0} (only 2 and 3 are supported)")]
    UnsupportedObjectiveCount(usize),

    #[error("unknown problem(s): {}", .0.join(", "))]
    UnknownProblem(Vec<String>),

    #[error("point outside the problem domain: {0}")]
    Domain(String),

    #[error("evaluation budget exhausted")]
    BudgetExhausted,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("task {task_id} failed: {reason}")]
    TaskFailed { task_id: usize, reason: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
