use thiserror::Error;

/// Errors raised by the kernel, Riccati, Burgers and finite-difference pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {t} outside the valid interval [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("division by zero: {0}")]
    Division(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudget { t: f64, max_steps: usize },

    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("singular superposition at t = {t}: alpha(0) + gamma0(t) = {value}")]
    SingularSuperposition { t: f64, value: f64 },

    #[error("singular inversion at t = {t}: gamma(t) - gamma(0) = {value}")]
    SingularInversion { t: f64, value: f64 },

    #[error("quadrature did not converge: estimated error {error:e} after {intervals} subdivisions")]
    Quadrature { error: f64, intervals: usize },

    #[error("kernel log-value {value} overflows")]
    Overflow { value: f64 },

    #[error("non-positive value {value} at x = {x}")]
    NonPositive { x: f64, value: f64 },

    #[error("insufficient time levels: need at least {need}, got {got}")]
    TimeLevels { need: usize, got: usize },

    #[error("gamma is not strictly increasing on (0, {t}]")]
    NonMonotone { t: f64 },

    #[error("Riccati blow-up inside window: pole at z = {z}")]
    Pole { z: f64 },

    #[error("finite-difference instability at t = {t}: max |u| = {norm:e}")]
    Unstable { t: f64, norm: f64 },

    #[error("CFL number {number} exceeds {limit}")]
    Cfl { number: f64, limit: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
