use thiserror::Error;

/// Errors raised by set construction, projections, drivers and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid stop rule: {0}")]
    InvalidStopRule(String),

    /// The epigraph root finder could not bracket the stationarity equation.
    #[error("root finder failed at ({s}, {t}): {reason}")]
    RootFinder { s: f64, t: f64, reason: String },

    #[error("projection failed while computing iterate {index}: {source}")]
    Projection {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no closed form for the pair ({0}, {1})")]
    NoClosedForm(String, String),

    #[error("trace too short: need at least {needed} iterates, have {have}")]
    TraceTooShort { needed: usize, have: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
