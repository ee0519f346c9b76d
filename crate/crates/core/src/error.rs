use thiserror::Error;

use crate::lp::LpError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("exponent mismatch: {0} vs {1}")]
    ExponentMismatch(String, String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),

    #[error("Auerbach search did not converge (functional norm slack {slack:.3e})")]
    AuerbachNotConverged {
        slack: f64,
        best: Box<crate::constructions::AuerbachBasis>,
    },

    #[error("net of cardinality {size} exceeds the volume bound {bound}")]
    NetCardinality { size: usize, bound: u64 },

    #[error("degenerate certificate: {0}")]
    Degenerate(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
