use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("time {t} lies outside [{t0}, {t1}]")]
    OutOfTimeRange { t: f64, t0: f64, t1: f64 },

    #[error(
        "linear solver stopped after {iterations} iterations with relative residual {residual:e}"
    )]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("time integration diverged at step {step}")]
    Divergence { step: usize },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite gradient rejected")]
    NonFiniteGradient,

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("probe solve for parameter `{name}` failed: {source}")]
    Probe { name: String, source: Box<Error> },

    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
