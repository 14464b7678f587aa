use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed instance document: {0}")]
    Malformed(String),
    #[error("instance must contain at least one item")]
    Empty,
    #[error("negative weight at position {index}")]
    NegativeWeight { index: usize },
    #[error("prescribed item count {m} is outside 0..={n}")]
    ItemCountOutOfRange { m: usize, n: usize },
    #[error("capacity {0} is not a non-negative multiple of 1/2")]
    BadCapacity(String),
    #[error("valuation vectors have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("valuation at position {index} must be a positive integer")]
    NonPositiveValuation { index: usize },
    #[error("total weight does not fit in 64 bits")]
    Overflow,
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(String),
    #[error("n = {n} exceeds the enumeration guard of {guard}")]
    EnumerationGuard { n: usize, guard: usize },
    #[error("exact DP table of {cells} cells exceeds the budget of {budget}")]
    MemoryBudget { cells: u128, budget: u128 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("allocation is not a partition of the goods: {0}")]
    NotAPartition(String),
    #[error("invalid generator spec: {0}")]
    InvalidGenerator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
