use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree sequence is empty")]
    Empty,

    #[error("degrees sum to {sum}, expected {n}")]
    SumMismatch { sum: i128, n: usize },

    #[error("vertex {vertex} has negative degree {degree}")]
    NegativeDegree { vertex: usize, degree: i64 },

    #[error("infeasible generator parameters: {0}")]
    InfeasibleParams(String),

    /// `vertex` is 0-indexed; the message shows the 1-indexed id.
    #[error("vertex {} is out of range 1..={n}", vertex + 1)]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("n = {n} exceeds the rational backend limit of {limit}")]
    OracleLimitExceeded { n: usize, limit: usize },

    #[error("enumerating {count} functions exceeds the budget of {budget}")]
    BudgetExceeded { count: String, budget: u64 },

    #[error("reduction needs {needed} degree-1 vertices besides w, only {available} exist")]
    NotEnoughDegreeOneVertices { needed: usize, available: usize },

    #[error("regime not applicable: {0}")]
    RegimeNotApplicable(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("degenerate bins: {0}")]
    DegenerateBins(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}
