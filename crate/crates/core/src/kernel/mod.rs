//! The heat kernel
//!
//! ```text
//! K0(x, y, t) = (2 pi mu0)^(-1/2) exp(alpha0 x^2 + beta0 x y + gamma0 y^2 + delta0 x + eps0 y + kappa0)
//! ```
//!
//! and everything built on it: Cauchy problems, expectations, the
//! transformation route, and the closed-form kernels used as references.

mod cauchy;
mod closed_form;

use std::sync::Arc;

pub use cauchy::{
    expectation, normalization, solve_ivp, transform_solve, Expectation, InitialData, IvpSolution, Variable,
};
pub use closed_form::ClosedForm;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::riccati::{FundamentalRiccati, KernelCoefficients};

/// Log-values above this are reported as overflow.
pub const LOG_OVERFLOW: f64 = 700.0;
/// Default truncation in standard deviations of the y-Gaussian.
pub const TRUNCATION_SIGMAS: f64 = 10.0;
/// Kernel mass outside the window above which a truncation warning is issued.
pub const TAIL_WARNING: f64 = 1e-8;

/// Anything that evaluates a kernel `K(x, y, t)`.
pub trait KernelFn: Sync {
    fn log_eval(&self, x: f64, y: f64, t: f64) -> Result<f64>;

    fn eval(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let l = self.log_eval(x, y, t)?;
        if l > LOG_OVERFLOW {
            return Err(Error::Overflow { value: l });
        }
        Ok(l.exp())
    }
}

/// Kernel built from the fundamental solution of the Riccati-type system.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    fund: Arc<FundamentalRiccati>,
}

impl HeatKernel {
    pub fn new(coeffs: &CoefficientSet, tol: f64) -> Result<Self> {
        Ok(Self::from_fundamental(Arc::new(FundamentalRiccati::build(coeffs, tol)?)))
    }

    pub fn from_fundamental(fund: Arc<FundamentalRiccati>) -> Self {
        Self { fund }
    }

    pub fn fundamental(&self) -> &FundamentalRiccati {
        &self.fund
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        self.fund.coefficients()
    }

    pub fn valid_end(&self) -> f64 {
        self.fund.valid_end()
    }

    /// The quadratic form at time `t`, assembled once for reuse across `(x, y)`.
    pub fn slice(&self, t: f64) -> Result<KernelSlice> {
        let k = self.fund.at(t)?;
        if !(k.mu0 > 0.0) {
            return Err(Error::Division(format!("mu0({t}) = {} is not positive", k.mu0)));
        }
        Ok(KernelSlice { t, k, log_norm: -0.5 * (2.0 * std::f64::consts::PI * k.mu0).ln() })
    }

    pub fn evaluate(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        self.slice(t)?.value(x, y)
    }
}

impl KernelFn for HeatKernel {
    fn log_eval(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        Ok(self.slice(t)?.log_value(x, y))
    }
}

/// The kernel at one fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSlice {
    pub t: f64,
    pub k: KernelCoefficients,
    pub log_norm: f64,
}

impl KernelSlice {
    pub fn log_value(&self, x: f64, y: f64) -> f64 {
        let k = &self.k;
        self.log_norm
            + x * (k.alpha0 * x + k.beta0 * y + k.delta0)
            + y * (k.gamma0 * y + k.eps0)
            + k.kappa0
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        let l = self.log_value(x, y);
        if l > LOG_OVERFLOW {
            return Err(Error::Overflow { value: l });
        }
        Ok(l.exp())
    }

    /// `y -> log K(x, y, t)` as a quadratic exponent.
    pub fn in_y(&self, x: f64) -> QuadraticExponent {
        let k = &self.k;
        QuadraticExponent {
            a2: k.gamma0,
            a1: k.beta0 * x + k.eps0,
            a0: self.log_norm + k.alpha0 * x * x + k.delta0 * x + k.kappa0,
        }
    }

    /// `x -> log K(x, y, t)` as a quadratic exponent.
    pub fn in_x(&self, y: f64) -> QuadraticExponent {
        let k = &self.k;
        QuadraticExponent {
            a2: k.alpha0,
            a1: k.beta0 * y + k.delta0,
            a0: self.log_norm + k.gamma0 * y * y + k.eps0 * y + k.kappa0,
        }
    }
}

/// `a2 s^2 + a1 s + a0` with `a2 < 0`: a Gaussian weight in `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticExponent {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl QuadraticExponent {
    pub fn check(&self) -> Result<()> {
        if !(self.a2 < 0.0) || !self.a1.is_finite() || !self.a0.is_finite() {
            return Err(Error::Invalid(format!(
                "exponent {} s^2 + {} s + {} is not a decaying Gaussian",
                self.a2, self.a1, self.a0
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        -self.a1 / (2.0 * self.a2)
    }

    pub fn std_dev(&self) -> f64 {
        1.0 / (-2.0 * self.a2).sqrt()
    }

    /// Value of the exponent at its maximum.
    pub fn log_peak(&self) -> f64 {
        self.a0 - self.a1 * self.a1 / (4.0 * self.a2)
    }

    pub fn log_total_mass(&self) -> f64 {
        self.log_peak() + 0.5 * (std::f64::consts::PI / -self.a2).ln()
    }

    /// `mean +- sigmas * std_dev`.
    pub fn window(&self, sigmas: f64) -> (f64, f64) {
        let (m, s) = (self.mean(), self.std_dev());
        (m - sigmas * s, m + sigmas * s)
    }

    /// Fraction of the Gaussian mass outside `[lo, hi]`.
    pub fn tail_mass(&self, lo: f64, hi: f64) -> f64 {
        use statrs::function::erf::erfc;
        let (m, s) = (self.mean(), self.std_dev() * std::f64::consts::SQRT_2);
        0.5 * erfc((hi - m) / s) + 0.5 * erfc((m - lo) / s)
    }

    /// `int_lo^hi exp(exponent(s)) phi(s) ds`, integrated relative to the peak.
    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<f64> {
        if !(hi > lo) {
            return Ok(0.0);
        }
        let (m, a2) = (self.mean(), self.a2);
        let r = quad::integrate(|s| (a2 * (s - m) * (s - m)).exp() * phi(s), lo, hi, opts)?;
        scale_by_exp(r.value, self.log_peak())
    }
}

/// `value * exp(log_scale)` with overflow reporting.
pub(crate) fn scale_by_exp(value: f64, log_scale: f64) -> Result<f64> {
    if value == 0.0 {
        return Ok(0.0);
    }
    let l = log_scale + value.abs().ln();
    if l > LOG_OVERFLOW {
        return Err(Error::Overflow { value: l });
    }
    Ok(value * log_scale.exp())
}

/// The small-time form
/// `(4 pi a t)^(-1/2) exp(-(x-y)^2/(4 a t)) exp(a'(x-y)^2/(8a^2) - c(x^2-y^2)/(4a)) exp(g(x-y)/(2a))`
/// with coefficients frozen at `t = 0`. Only meaningful for small `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticKernel {
    a: f64,
    da: f64,
    c: f64,
    g: f64,
}

impl AsymptoticKernel {
    pub fn new(coeffs: &CoefficientSet) -> Self {
        let v = coeffs.at(0.0);
        Self { a: v.a, da: v.da, c: v.c, g: v.g }
    }
}

impl KernelFn for AsymptoticKernel {
    fn log_eval(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain { t, lo: 0.0, hi: f64::INFINITY });
        }
        let (a, r) = (self.a, x - y);
        Ok(-0.5 * (4.0 * std::f64::consts::PI * a * t).ln() - r * r / (4.0 * a * t)
            + self.da * r * r / (8.0 * a * a)
            - self.c * (x * x - y * y) / (4.0 * a)
            + self.g * r / (2.0 * a))
    }
}
