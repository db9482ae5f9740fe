use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("position ({x}, {y}) lies outside the cell grid footprint")]
    OutOfFootprint { x: f64, y: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("descriptor dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("degenerate evidence: certain detection (p*q = 1) in cell {cell} without finding the target")]
    DegenerateEvidence { cell: usize },
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("ensemble collapse: every rollout weight is zero")]
    EnsembleCollapse,
    #[error("splat file parse error: {0}")]
    Parse(String),
    #[error("splat record {record}: {reason}")]
    BadRecord { record: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
