use thiserror::Error;

use crate::market::{PricePair, Regime};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value lies outside the domain of the operation (negative price,
    /// rate outside [0, 1], non-positive size, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The two offers cannot be separated on the axis the operation needs,
    /// e.g. equal total errors in the positively correlated segment.
    #[error("degenerate market: {0}")]
    Degenerate(String),

    #[error("operation requires {required}, but the duopoly is in regime {found:?}")]
    WrongRegime { required: &'static str, found: Regime },

    #[error("modelling assumption violated: {0}")]
    Assumption(String),

    /// Best-response iteration (and its grid fallback) failed to settle.
    #[error(
        "no equilibrium found after {iterations} iterations (last iterate p1 = {p1:.6}, p2 = {p2:.6})",
        p1 = last.p1,
        p2 = last.p2
    )]
    NoConvergence { iterations: usize, last: PricePair },

    /// A brute-force search found no pure-strategy equilibrium.
    #[error("no equilibrium found: {0}")]
    NoEquilibrium(String),

    #[error("no interior optimum: {0}")]
    NoInteriorSolution(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
