use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid cell {grid:?} does not match medium cell {medium:?}")]
    CellMismatch { grid: Vec<f64>, medium: Vec<f64> },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("principal eigenfunction changes sign (min {min:.3e}); grid too coarse for Perron structure")]
    PerronViolation { min: f64 },

    #[error("cell problem cross-check failed: flux form {flux:.12e} vs energy form {energy:.12e}")]
    CellCrossCheck { flux: f64, energy: f64 },

    #[error("root bracket left the admissible range |mu| <= {limit}")]
    BracketExhausted { limit: f64 },

    #[error("front left the computational window at xi = {position:.4}")]
    FrontEscaped { position: f64 },

    #[error("profile left [-0.05, 1.05] (value {value:.4})")]
    ProfileOutOfRange { value: f64 },

    #[error("decay window too short: {points} points")]
    WindowTooShort { points: usize },

    #[error("plateau detection ambiguous: {0}")]
    AmbiguousPlateau(String),

    #[error("terrace speeds out of order: c[{index}] = {upper:.6} > c[{next}] = {lower:.6}", next = index + 1)]
    SpeedOrdering {
        index: usize,
        upper: f64,
        lower: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("front tracking failed: {0}")]
    Tracking(String),
}

pub type Result<T> = std::result::Result<T, Error>;
