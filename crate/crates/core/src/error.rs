use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable index z{index} exceeds dimension {n}")]
    VariableOutOfRange { index: usize, n: usize },
    #[error("negative exponent in term z{index}^{exp}")]
    NegativeExponent { index: usize, exp: i64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("constant polynomial has no Markov bound")]
    ConstantPolynomial,
    #[error("singular set is empty")]
    EmptySingularSet,
    #[error("singular point {index} is degenerate or not critical")]
    DegenerateSingularity { index: usize },
    #[error("too many nondegenerate singular points: {count} > {cap}")]
    TooManySingularPoints { count: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("zero gradient")]
    ZeroGradient,
    #[error("Newton iteration failed to converge")]
    NoConvergence,
    #[error("point lies outside the cover")]
    PointNotCovered,
    #[error("points lie in different components")]
    Disconnected,
    #[error("construction budget exceeded: estimated {estimate:.3e} > {budget:.3e}")]
    BudgetExceeded { estimate: f64, budget: f64 },
    #[error("chart rejected: {0}")]
    ChartRejected(String),
    #[error("domain touches no chart")]
    DomainUnreachable,
    #[error("degenerate maximum: {0}")]
    DegenerateMaximum(String),
}

pub type Result<T> = std::result::Result<T, Error>;
