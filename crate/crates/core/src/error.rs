use thiserror::Error;

/// Errors raised by model construction, enumeration, evaluation and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edit would make the count at site {site} negative")]
    NegativeCount { site: usize },

    #[error("edit would put more than one walker on site {site}")]
    ExclusionViolated { site: usize },

    #[error("bad parameter `{name}`: {reason}")]
    BadParameter { name: String, reason: String },

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error("variant {variant} needs DC arrival and exit rates (xi, eta)")]
    MissingXiEta { variant: String },

    #[error("state {state} is not admissible: {reason}")]
    InadmissibleState { state: String, reason: String },

    #[error("rate {value} for {what} is negative or not finite")]
    InvalidRate { what: String, value: f64 },

    #[error("enumeration budget of {budget} states exceeded")]
    BudgetExceeded { budget: usize },

    #[error("series {series} diverged: term ratio {ratio} >= 1")]
    Diverged { series: String, ratio: f64 },

    #[error("transition {from} -> {to} has rate {rate} but the reverse rate is zero")]
    MissingReverse { from: String, to: String, rate: f64 },

    #[error("chain is reducible: {to} cannot be reached from {from}")]
    Reducible { from: String, to: String },

    #[error("distributions are defined on different index sets ({left} vs {right} points)")]
    DomainMismatch { left: usize, right: usize },

    #[error("state {state} is absorbing (total rate zero)")]
    AbsorbingState { state: String },

    #[error("trajectory has zero simulated time")]
    EmptyTrajectory,

    #[error("linear solve failed: {0}")]
    SolveFailed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
