use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("OAM index {l} outside the supported range |l| <= {max}")]
    OamOutOfRange { l: i32, max: u32 },

    #[error("gaussian field requested for a beam with OAM index {0}; use lg_field")]
    NotGaussian(i32),

    #[error(
        "quadrature did not converge after {evaluations} evaluations \
         (partial value {partial}, error estimate {error})"
    )]
    QuadratureFailure {
        partial: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("grid too coarse: relative change {relative_change:.3e} on refinement (estimate {estimate})")]
    RefinementNeeded { estimate: f64, relative_change: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("projection onto vertical polarization is null")]
    NullProjection,

    #[error("unsupported state: {0}")]
    UnsupportedState(String),

    #[error("visibility undefined for zero counts")]
    UndefinedVisibility,

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("structure not found: {0}")]
    StructureNotFound(String),

    #[error("event budget exceeded: {expected:.3e} expected events, limit {limit:.3e}")]
    EventBudgetExceeded { expected: f64, limit: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate loss chain: transmission product {product:.3e}")]
    DegenerateChain { product: f64 },

    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake_case identifier for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::OamOutOfRange { .. } => "oam_out_of_range",
            Error::NotGaussian(_) => "not_gaussian",
            Error::QuadratureFailure { .. } => "quadrature_failure",
            Error::RefinementNeeded { .. } => "refinement_needed",
            Error::DegenerateState(_) => "degenerate_state",
            Error::NullProjection => "null_projection",
            Error::UnsupportedState(_) => "unsupported_state",
            Error::UndefinedVisibility => "undefined_visibility",
            Error::ContractViolation(_) => "contract_violation",
            Error::StructureNotFound(_) => "structure_not_found",
            Error::EventBudgetExceeded { .. } => "event_budget_exceeded",
            Error::InsufficientData(_) => "insufficient_data",
            Error::DegenerateChain { .. } => "degenerate_chain",
            Error::InvalidCalibration(_) => "invalid_calibration",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Checks `value > 0` and finite.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

/// Checks `value >= 0` and finite.
pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(invalid(
            name,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}

/// Checks `0 <= value <= 1`.
pub(crate) fn unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(invalid(name, format!("must lie in [0, 1], got {value}")))
    }
}
