use thiserror::Error;

use crate::metric::ValidationVerdict;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance must contain at least one point")]
    EmptyInstance,
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    RaggedMatrix { row: usize, len: usize, expected: usize },
    #[error("distance ({i}, {j}) is not a finite number")]
    NonFinite { i: usize, j: usize },
    #[error("metric validation failed: {0}")]
    InvalidMetric(Box<ValidationVerdict>),
    #[error("k = {k} is out of range for n = {n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("point index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid clustering: {0}")]
    InvalidClustering(String),
    #[error("clustering has no centers")]
    MissingCenters,
    #[error("enumeration of {required} {what} exceeds the budget of {budget}")]
    BudgetExceeded { what: &'static str, required: u128, budget: u128 },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph has {n} vertices; exact graph oracles support at most {max}")]
    GraphTooLarge { n: usize, max: usize },
    #[error("vertex count {0} is not divisible by 3")]
    NotDivisibleByThree(usize),
    #[error("invalid 3DM instance: {0}")]
    InvalidThreeDm(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("instance distances exceed 1; additive stability needs a unit-range metric")]
    NotUnitRange,
    #[error("duplicate point {0}")]
    DuplicatePoint(usize),
    #[error("point {point} is not in cluster {cluster}")]
    NotInCluster { point: usize, cluster: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
