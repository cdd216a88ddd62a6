use thiserror::Error;

/// Crate-wide error type.
///
/// The variants are grouped by what the caller can do about them:
/// `InvalidParameter`, `ConditionA` and `Regime` are rejected inputs (the
/// CLI maps them to exit code 3), the remaining variants are computations
/// that could not be completed at the requested accuracy.
#[derive(Debug, Error)]
pub enum SntError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The response function violates Condition A (non-increasing,
    /// right-continuous, h(0+) <= 1, and not an indicator b*1[0,a)).
    #[error("condition A violation: {0}")]
    ConditionA(String),

    /// A precondition on lambda * integral(h) does not hold for the
    /// requested operation (e.g. the unit-regime identity needed by the
    /// fixed-point iteration and mixing-measure construction).
    #[error("regime violation: {0}")]
    Regime(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// Alternating-series cancellation or domain cap exceeded; the value
    /// would be noise, so it is refused instead.
    #[error("series breakdown: {0}")]
    SeriesBreakdown(String),

    /// Analytic tail/CDF requested for a sampler-only composite.
    #[error("unsupported analytic form: {0}")]
    Unsupported(String),

    /// Root finder or inverse-CDF bisection could not bracket/converge.
    #[error("inversion failure: {0}")]
    Inversion(String),

    /// Two grids that must share abscissae do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, SntError>;
