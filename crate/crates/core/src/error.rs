use thiserror::Error;

/// Errors raised while loading problems, running the solver, or certifying a point.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point does not belong to the space it was used with.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this kind of space or functional.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The distance data does not describe a metric.
    #[error("invalid metric space: {0}")]
    InvalidSpace(String),

    /// A user-supplied functional produced NaN.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// An evaluated value fell below the declared lower bound.
    #[error("functional `{name}` returned {value} below its declared lower bound {lower_bound}")]
    LowerBoundViolated {
        name: String,
        value: f64,
        lower_bound: f64,
    },

    /// A finite-difference probe hit +inf.
    #[error("derivative undefined: {0}")]
    DerivativeUndefined(String),

    /// The start point does not satisfy `F(u) <= lower_bound + tolerance`.
    #[error("rejected start: F(u) = {value} exceeds lower_bound + tolerance = {bound} ({hypothesis})")]
    RejectedStart {
        value: f64,
        bound: f64,
        hypothesis: String,
    },

    /// Every value of the functional is +inf.
    #[error("functional takes no finite value")]
    NoFiniteValue,

    /// Finite spaces are capped for exhaustive checking.
    #[error("space has {0} points; at most {max} are supported", max = crate::space::MAX_FINITE_POINTS)]
    TooLarge(usize),

    /// Solver or verifier configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
