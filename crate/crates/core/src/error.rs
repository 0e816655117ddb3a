use thiserror::Error;

/// Errors raised by the receiver algebra, the Poisson calculus and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("load {load:?} lies outside the table box with cap {cap:?}")]
    OutOfDomain { load: Vec<u32>, cap: Vec<u32> },

    #[error("success function is not contractive at {load:?}: returned {output:?}")]
    NotContractive { load: Vec<u32>, output: Vec<u32> },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("receiver lacks the {0} flag")]
    MissingFlag(&'static str),

    #[error("enumeration of {requested} loads exceeds the limit of {limit}")]
    EnumerationLimit { requested: u128, limit: u128 },

    #[error("truncation tolerance {tolerance:e} not reachable within {max_terms} terms")]
    Truncation { tolerance: f64, max_terms: usize },

    #[error("probability {value} for class {class} lies outside [0, 1]")]
    ProbabilityRange { class: usize, value: f64 },

    #[error("invalid degree distribution: {0}")]
    InvalidDegree(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for the exhaustive oracle: {packets} packets (limit {limit})")]
    InstanceTooLarge { packets: u64, limit: u64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
