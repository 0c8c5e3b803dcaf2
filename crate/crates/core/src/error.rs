use thiserror::Error;

use crate::VarId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("variable {var} has cardinality 0")]
    ZeroCardinality { var: VarId },

    #[error("network structure is cyclic (involves variable {var})")]
    Cyclic { var: VarId },

    #[error("table of variable {var} has {found} entries, expected {expected}")]
    TableLength {
        var: VarId,
        expected: usize,
        found: usize,
    },

    #[error("CPT of variable {var} is not normalized: a column sums to {sum}")]
    Unnormalized { var: VarId, sum: f64 },

    #[error("CPT of variable {var} has an invalid entry {value}")]
    InvalidEntry { var: VarId, value: f64 },

    #[error("CPT scope of variable {var} does not match its family")]
    FamilyMismatch { var: VarId },

    #[error("variable {var} out of range (network has {count} variables)")]
    VariableOutOfRange { var: VarId, count: usize },

    #[error("value {value} out of range for variable {var} (cardinality {cardinality})")]
    ValueOutOfRange {
        var: VarId,
        value: usize,
        cardinality: usize,
    },

    #[error("variable {var} assigned twice")]
    DuplicateVariable { var: VarId },

    #[error("variable {var} has cardinality {left} in one factor and {right} in another")]
    CardinalityMismatch { var: VarId, left: usize, right: usize },

    #[error("variable {var} is not in the factor's scope")]
    NotInScope { var: VarId },

    #[error("elimination order does not contain variable {var}")]
    OrderMissing { var: VarId },

    #[error("ibound must be at least 1")]
    ZeroIbound,

    #[error("iteration {index} out of range (trace has {count} iterations)")]
    InvalidIteration { index: usize, count: usize },

    #[error("cannot split on an empty child set")]
    EmptySplit,

    #[error("variable {child} is not a child of {var}")]
    NotAChild { var: VarId, child: VarId },

    #[error("variable {var} has no children")]
    Childless { var: VarId },

    #[error("variable {var} does not appear in the jointree")]
    NotInJointree { var: VarId },

    #[error("limit {limit} is below the largest family size {family} (variable {var})")]
    LimitBelowFamily {
        limit: usize,
        family: usize,
        var: VarId,
    },

    #[error("limit must be at least 1")]
    ZeroLimit,

    #[error("split network was not derived from the given base network")]
    ForeignSplit,

    #[error("invalid coding spec: {0}")]
    CodingSpec(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
