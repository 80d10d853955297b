use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("base point {0} lies on a singular fiber")]
    SingularFiber(f64),
    #[error("volume {volume} exceeds fiber capacity {capacity}")]
    ExceedsCapacity { volume: f64, capacity: f64 },
    #[error("cells {0:?} and {1:?} are not adjacent")]
    NonAdjacent((usize, usize), (usize, usize)),
    #[error("region reaches the truncated edge of the fiber grid: {0}")]
    Truncation(String),
    #[error("fiber density has a non-integrable left tail: {0}")]
    NonIntegrableTail(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("enlargement curve is not monotone at radius index {index}")]
    NonMonotone { index: usize },
    #[error("profile has a jump near base sample {index}")]
    Jump { index: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("undersampled: {0}")]
    Undersampled(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("slope hypothesis fails at sample {index} (x = {x}): {f_slope} > {h_slope}")]
    HypothesisFails { index: usize, x: f64, f_slope: f64, h_slope: f64 },
    #[error("candidate family of {needed} exceeds the budget of {budget}")]
    Budget { needed: u64, budget: u64 },
    #[error("column {column} does not decrease under refinement:\n{table}")]
    NotConverging { column: String, table: String },
}

pub type Result<T> = std::result::Result<T, Error>;
