use thiserror::Error;

/// Errors raised by the model, solver and QFI pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("basis dimension {dim} exceeds the cap of {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("displaced-Fock overlap <{k}|D({d})|{l}> is outside the stable range: {reason}")]
    OverlapUnstable { k: usize, l: usize, d: f64, reason: String },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("truncation reached n_tr = {n_tr_max} without convergence; energy deltas per round: {trace:?}")]
    TruncationExhausted { n_tr_max: usize, trace: Vec<f64> },

    #[error("reduced atomic state is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state violates {identity}: deviation {deviation:e}")]
    InvariantViolation { identity: &'static str, deviation: f64 },

    #[error("spectrum is not normalized: sum of eigenvalues is {sum}")]
    SpectrumNotNormalized { sum: f64 },

    #[error("invalid two-atom state: {0}")]
    InvalidState(String),

    #[error("power-law fit needs positive data; point {index} (n = {n}) has y = {y}")]
    NonPositiveData { index: usize, n: f64, y: f64 },

    #[error("power-law fit needs at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("solve failed at N = {n_atoms}, lambda = {lambda}: {source}")]
    AtPoint {
        n_atoms: usize,
        lambda: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
