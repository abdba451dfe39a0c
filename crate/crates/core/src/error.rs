use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for truncation {dim}")]
    OutOfRange { index: usize, dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("truncation too coarse: {what} (need dim >= {required_dim})")]
    Precision { what: String, required_dim: usize },

    #[error("truncated channel unreliable on block {block}: unitality defect {defect:.3e} exceeds {limit:.1e}")]
    TruncationDefect { block: usize, defect: f64, limit: f64 },

    #[error("vector {index} not normalized: norm defect {defect:.3e}")]
    Normalization { index: usize, defect: f64 },

    #[error("basis not orthogonal: overlap {overlap:.3e}")]
    Orthogonality { overlap: f64 },

    #[error("encoding constraint violated: residual {residual:.3e}")]
    Constraint { residual: f64 },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("optimization failed: {0}")]
    OptimizationFailure(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
