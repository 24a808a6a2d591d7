use thiserror::Error;

/// Errors raised by the operator algebra, traces and flows.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: cutoff {left} vs cutoff {right}")]
    BasisMismatch { left: usize, right: usize },

    #[error("requested symbol depth {requested} exceeds the {available} known components")]
    DepthExceeded { requested: usize, available: usize },

    #[error("parity class `neither` has no composition rule")]
    NeitherClass,

    #[error("symbol is not elliptic: {0}")]
    NonElliptic(String),

    #[error("parametrix needs an x-independent principal coefficient on both branches")]
    NonConstantPrincipal,

    #[error("unsupported weight: {0}")]
    UnsupportedWeight(String),

    #[error("kernel decay not certified: {0}")]
    NotCertified(String),

    #[error("exponential factor with exponent {exponent:.1} exceeds the overflow guard {guard}")]
    Overflow { exponent: f64, guard: f64 },

    #[error("degenerate Gram matrix (smallest singular value {0:e})")]
    DegenerateGram(f64),

    #[error("degenerate biplane: |X ∧ Y|² = {0:e}")]
    DegenerateBiplane(f64),

    #[error("Lax hypothesis violated: {0}")]
    LaxHypothesis(String),

    #[error("implicit stage did not converge in {iterations} iterations (update {update:e})")]
    ImplicitStage { iterations: usize, update: f64 },

    #[error("step rejected at t = {time}: local error estimate {estimate:e} > {tolerance:e}")]
    StepRejected { time: f64, estimate: f64, tolerance: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
