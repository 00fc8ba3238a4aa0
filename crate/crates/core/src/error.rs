use thiserror::Error;

/// Errors produced by the memory model and its numerical back ends.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid pulse shape: {0}")]
    InvalidShape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("argument {x} outside the domain of {function}")]
    Domain { function: &'static str, x: f64 },

    #[error("quadrature tolerance not met: estimate {estimate}, error {error}")]
    ToleranceNotMet { estimate: f64, error: f64 },

    #[error("efficiency undefined for r = 0 (no squeezing to transfer)")]
    UndefinedEfficiency,

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("step size underflow at t = {t} (h = {step:e}); stiffness ratio {ratio:.3e}")]
    Stiffness { t: f64, step: f64, ratio: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
