use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A bound or theorem whose hypotheses do not hold for the given inputs.
///
/// Returned instead of a clamped or extrapolated value.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{bound} is inapplicable: {condition}")]
pub struct Inapplicable {
    pub bound: &'static str,
    pub condition: String,
}

impl Inapplicable {
    pub fn new(bound: &'static str, condition: impl Into<String>) -> Self {
        Self {
            bound,
            condition: condition.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("invalid weight {value} at index {index}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("weight function value {value} at index {index} is below 1")]
    WeightBelowOne { index: usize, value: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("stationary distribution is not unique")]
    NonUniqueStationary,

    #[error("no contraction: tau of the {power}-step kernel is {tau}")]
    NoContraction { power: usize, tau: f64 },

    #[error("ergodicity certificate failed at n = {n}: tau = {tau} > {bound}")]
    CertificateFailed { n: usize, tau: f64, bound: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("enumeration of {size} configurations exceeds cap {cap}")]
    EnumerationCap { size: u128, cap: u128 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Inapplicable(#[from] Inapplicable),
}

impl Error {
    /// True for violations of a theorem's or bound's hypotheses, as opposed
    /// to malformed inputs.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::Inapplicable(_)
                | Error::NoContraction { .. }
                | Error::CertificateFailed { .. }
                | Error::NonUniqueStationary
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
