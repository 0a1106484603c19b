use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grade mismatch: expected {expected}, found {found}")]
    GradeMismatch { expected: usize, found: usize },

    #[error("invalid multi-index {axes:?}: {reason}")]
    InvalidIndex {
        axes: Vec<usize>,
        reason: &'static str,
    },

    /// The worldsheet (pure base) coordinate of a polyvector vanishes.
    #[error("polyvector not a graph over the worldsheet")]
    Chart,

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Singular quadric; carries the numerical rank.
    #[error("degenerate quadric: rank {rank} of {size}")]
    Degenerate { rank: usize, size: usize },

    #[error("point is not on the variety (relative residual {residual:e})")]
    Membership { residual: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("parse error: {0}")]
    Parse(String),
}
