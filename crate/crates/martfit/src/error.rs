use thiserror::Error;

/// Errors produced while constructing or operating on marginals, surfaces
/// and barriers.
#[derive(Debug, Error)]
pub enum MartfitError {
    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),
    #[error("invalid call slice: {0}")]
    InvalidSlice(String),
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("convex order violated: {0}")]
    ConvexOrder(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MartfitError>;
