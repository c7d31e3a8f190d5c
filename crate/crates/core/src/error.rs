use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected truncation N = {expected}, got N = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("symbol table has no entry for k = {k} (stored range is |k| <= {max})")]
    TableOutOfRange { k: i64, max: i64 },

    #[error("bump profile is degenerate: {0}")]
    DegenerateBump(String),

    #[error("clustering is ambiguous at this tolerance: {0}")]
    AmbiguousClustering(String),

    #[error("need at least two distinct eigenvalues, found {0}")]
    TooFewRepresentatives(usize),

    #[error("eigenvalue structure matches neither criterion; no moment-method control available")]
    CriterionInapplicable,

    #[error("duplicate frequency {0} in exponential family; cluster before building the Gram matrix")]
    DuplicateFrequency(f64),

    #[error(
        "Gram matrix of exponentials is ill-conditioned (A = {min_eig:.3e}, B/A = {condition:.3e}); \
         try a longer horizon (controllability needs T > {min_horizon:.4})"
    )]
    IllConditionedGram {
        min_eig: f64,
        condition: f64,
        min_horizon: f64,
    },

    #[error(
        "initial and target means differ (û₀(0) = {initial}, û₁(0) = {target}); \
         the control is mean-free so both fields must share the same mean"
    )]
    MeanMismatch { initial: String, target: String },

    #[error("horizon T = {horizon} is not above the controllability time {required}")]
    HorizonTooShort { horizon: f64, required: f64 },

    #[error("moment block for the cluster at λ = {lambda} (modes {modes:?}) is singular")]
    SingularBlock { lambda: f64, modes: Vec<i64> },

    #[error("system is not observable at this truncation (min eigenvalue {min_eig:.3e} <= floor {floor:.3e})")]
    Unobservable { min_eig: f64, floor: f64 },

    #[error("closed-loop trajectory became non-finite at t = {0}")]
    NonFinite(f64),
}

impl Error {
    /// True for failures that signal a violated hypothesis of the construction
    /// (singular blocks, lost observability) rather than bad input.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::CriterionInapplicable
                | Error::IllConditionedGram { .. }
                | Error::SingularBlock { .. }
                | Error::Unobservable { .. }
                | Error::NonFinite(_)
                | Error::DegenerateBump(_)
                | Error::AmbiguousClustering(_)
        )
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
