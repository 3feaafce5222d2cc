use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("variable {name}: lower bound exceeds upper bound")]
    InvertedBounds { name: String },
    #[error("row {name}: lower bound exceeds upper bound")]
    InvertedRow { name: String },
    #[error("row {row} references unknown variable index {index}")]
    UnknownVariable { row: String, index: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("integer variable {name} must have finite bounds")]
    UnboundedInteger { name: String },
    #[error("external backend: {0}")]
    Backend(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
