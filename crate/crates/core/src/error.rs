use thiserror::Error;

/// Errors raised by the outage evaluators and their supporting numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutageError {
    #[error("spectrum has repeated non-unit eigenvalues or a gap below {min_gap:e}")]
    NonDistinctSpectrum { min_gap: f64 },
    #[error("eigenvalue trace {trace} does not equal {expected}")]
    TraceViolation { trace: f64, expected: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("log-gamma pole at non-positive integer {0}")]
    PoleAtNonpositiveInteger(f64),
    #[error("degenerate Xi parameters: A = 0 requires alpha = -1 and phi = 1")]
    InvalidDegenerateParameters,
    #[error("residue kernel has an empty pole set")]
    EmptyPoleSet,
    #[error("permutation budget exceeded: {n}! terms (limit {limit}!)")]
    PermutationBudgetExceeded { n: usize, limit: usize },
    #[error("model {0} is not valid for this evaluator")]
    WrongModel(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("sample count must be at least 1")]
    ZeroSamples,
}

pub type Result<T> = std::result::Result<T, OutageError>;
