use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("membrane ordering violated at node {node}: u_{upper} - u_{lower} = {gap:e}")]
    OrderingViolated {
        node: usize,
        upper: usize,
        lower: usize,
        gap: f64,
    },

    #[error("non-finite value at node {node}, membrane {membrane}")]
    NonFinite { node: usize, membrane: usize },

    #[error("radius {radius} does not fit inside the domain around the given center")]
    RadiusOutOfDomain { radius: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
