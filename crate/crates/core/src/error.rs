use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value violates a type invariant (distribution, channel, config ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Two objects that must share an alphabet do not.
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    /// Table dimensions are inconsistent.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The root finder was handed an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// An iterative method ran out of iterations.
    #[error("{method} did not converge within {iterations} iterations")]
    MaxIter { method: &'static str, iterations: usize },

    /// The cost budget is below the cheapest channel input.
    #[error("cost budget {gamma} is below the minimum input cost {min_cost}")]
    InfeasibleCost { gamma: f64, min_cost: f64 },

    /// Sinkhorn scaling failed at a particular multiplier.
    #[error("Sinkhorn scaling diverged at lambda = {lambda} after {iterations} iterations (marginal violation {violation:e})")]
    SinkhornDivergence { lambda: f64, iterations: usize, violation: f64 },

    /// Problem is larger than the exact solver accepts.
    #[error("problem size {cells} exceeds the limit of {limit} cells")]
    SizeLimit { cells: usize, limit: usize },

    /// A scan grid has too few points for reliable detection.
    #[error("grid of {points} points is too coarse (need at least {required})")]
    GridTooCoarse { points: usize, required: usize },

    /// The block simulator's enumeration budget is exceeded.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A CSV or JSON document does not match the expected schema.
    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Bracket { .. } | Error::MaxIter { .. } | Error::SinkhornDivergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
