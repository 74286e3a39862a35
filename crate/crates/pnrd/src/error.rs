//! Error type shared across the crate.

/// Errors reported by constructors and operations.
///
/// Numeric payloads are carried as `f64` regardless of the scalar the caller
/// works in; they are diagnostic only.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scalar parameter fell outside its documented domain.
    #[error("{name} must lie in {domain}, got {value}")]
    OutOfRange {
        name: &'static str,
        domain: &'static str,
        value: f64,
    },

    /// A count parameter fell outside its documented domain.
    #[error("{name} must lie in {domain}, got {value}")]
    CountOutOfRange {
        name: &'static str,
        domain: &'static str,
        value: usize,
    },

    /// Coupling probabilities plus residual loss must partition unity.
    #[error("coupling and residual loss sum to {sum:.17}, expected 1")]
    UnnormalizedCoupling { sum: f64 },

    /// Vector arguments that must agree in length did not.
    #[error("{name}: expected length {expected}, got {got}")]
    LengthMismatch {
        name: &'static str,
        expected: usize,
        got: usize,
    },

    /// A click count exceeded the number of detector outputs.
    #[error("click count {m} exceeds the {n_outputs} detector outputs")]
    ClickCountOutOfRange { m: usize, n_outputs: usize },

    /// An operator or source did not fit the truncated photon-number space.
    #[error("{name}: dimension {got} exceeds supported dimension {supported}")]
    DimensionOverflow {
        name: &'static str,
        got: usize,
        supported: usize,
    },

    /// A diagonal operator entry was negative (or not a number).
    #[error("diagonal entry {index} is {value}; entries must be finite and >= 0")]
    NegativeDiagonal { index: usize, value: f64 },

    /// The truncation tail of a parametric-down-conversion source was too
    /// heavy for the requested cutoff.
    #[error("truncation tail mass {tail:.3e} at n_max {n_max} exceeds the {limit:.0e} budget")]
    TruncationTail { tail: f64, n_max: usize, limit: f64 },

    /// The exhaustive reference oracle refused a problem too large to
    /// enumerate.
    #[error("enumeration budget exceeded: about {estimate:.3e} terms, limit {limit:.1e}")]
    EnumerationBudget { estimate: f64, limit: f64 },

    /// A design search was asked about a family its operation does not cover.
    #[error("{operation} does not apply to the {family} family")]
    FamilyMismatch {
        operation: &'static str,
        family: &'static str,
    },

    /// A design search range contained no candidate.
    #[error("empty search range: {reason}")]
    EmptySearchRange { reason: String },

    /// Queries combined into one comparison must agree on source and target.
    #[error("comparison queries disagree: {reason}")]
    InconsistentQueries { reason: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
