use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("{name}({k}) is zero")]
    ZeroCoefficient { name: &'static str, k: i64 },

    #[error("weight w({k}) is not positive")]
    NonpositiveWeight { k: i64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("divergent: {0}")]
    Divergent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("ambient space mismatch: operator acts on {expected}, vector lives in {found}")]
    AmbientMismatch { expected: String, found: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ill-conditioned: condition number {cond:.3e} exceeds {limit:.0e}")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("{0} has no formal kernel")]
    NoKernel(String),

    #[error("degenerate spectral parameter: factor {j} of the eigenfunction product vanishes")]
    DegenerateLambda { j: i64 },

    #[error("numeric overflow: {0}")]
    Overflow(String),
}
