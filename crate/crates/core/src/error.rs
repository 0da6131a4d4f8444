use thiserror::Error;

/// Errors produced by the solvers and their supporting machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// An objective or kernel parameter is outside its legal range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data contains NaN or infinite entries, or is empty.
    #[error("invalid data: {0}")]
    Data(String),

    /// Every sample is (numerically) zero, so no direction can be preferred.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The ascent reached an iterate whose gradient sum vanishes even after
    /// a perturbed restart.
    #[error("stationary gradient: ascent stalled at a zero-gradient iterate")]
    StationaryDegenerate,

    /// Greedy extraction ran out of rank before producing the requested
    /// number of components.
    #[error("rank deficient: obtained {extracted} of {requested} requested components")]
    RankDeficient { requested: usize, extracted: usize },

    /// A dual component carries no feature-space energy (c'Kc is not positive).
    #[error("degenerate component: c'Kc = {energy} carries no positive energy")]
    DegenerateComponent { energy: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An oracle was handed input it does not support.
    #[error("unsupported oracle input: {0}")]
    UnsupportedInput(String),

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    /// A quantity that is non-negative by construction came out materially
    /// negative, which indicates state corruption rather than round-off.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
