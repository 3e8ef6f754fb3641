use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The expansion cannot decide the next coefficient with the available
    /// precision (or the value is rational and the remainder vanished).
    #[error("precision exhausted at continued-fraction depth {depth}")]
    PrecisionExhausted { depth: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid coefficient family: {0}")]
    InvalidFamily(String),

    /// An off-diagonal coefficient vanished where an invertible transfer
    /// matrix was required.
    #[error("singular phase: |b| = {value:e} at step {step} (theta = {theta})")]
    SingularPhase { step: i64, theta: f64, value: f64 },

    #[error("refinement budget of {budget} evaluations exceeded before reaching tolerance {tol:e}")]
    BudgetExceeded { budget: usize, tol: f64 },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("generator R applied to half-integer mode m = {m2}/2 at site {k}")]
    HalfIntegerMode { k: i64, m2: i64 },

    #[error("zero of b at {0} is not simple")]
    NonSimpleZero(f64),

    #[error("Last's bound violated: q = {q}, q*|sigma| = {value}")]
    LastBoundViolated { q: u64, value: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),
}
