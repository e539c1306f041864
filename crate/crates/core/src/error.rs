use alloc::string::String;

use crate::rootfind::ExistenceReport;

/// Errors produced by the estimators, simulators and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Not enough data for the requested block construction.
    #[error("estimation infeasible: {0}")]
    Infeasible(String),

    #[error("empirical moment generating function is unbounded at t = {t}")]
    Unbounded { t: f64 },

    /// The sample (or block series) violates the existence conditions.
    #[error(
        "adjustment coefficient does not exist for this data (mean_negative = {}, has_positive = {})",
        .0.mean_negative,
        .0.has_positive
    )]
    Existence(ExistenceReport),

    #[error("objective has no negative value on (0, {searched_to}]")]
    NoNegativeDip { searched_to: f64 },

    #[error("objective never becomes positive (searched up to t = {searched_to})")]
    NoSignChange { searched_to: f64 },

    #[error("simulated trajectory became non-finite at index {index}")]
    NonFinite { index: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
