use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::quad::{self, QuadOptions};
use crate::riccati::RiccatiPath;

use super::{HeatKernel, KernelFn, QuadraticExponent, TAIL_WARNING, TRUNCATION_SIGMAS};

#[derive(Clone)]
enum Shape {
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Samples { xs: Vec<f64>, values: Vec<f64> },
}

/// Initial data `phi(x)`: a function or piecewise-linear samples (zero outside
/// the sampled range), with an optional truncation half-width `L`.
#[derive(Clone)]
pub struct InitialData {
    shape: Shape,
    half_width: Option<f64>,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.shape {
            Shape::Function(_) => "function".to_string(),
            Shape::Samples { xs, .. } => format!("{} samples", xs.len()),
        };
        f.debug_struct("InitialData")
            .field("shape", &kind)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl InitialData {
    pub fn function<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self { shape: Shape::Function(Arc::new(f)), half_width: None }
    }

    pub fn sampled(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::Invalid("sampled initial data needs at least two (x, phi) pairs".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("sample abscissae must be strictly increasing".into()));
        }
        if xs.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("initial data must be finite".into()));
        }
        let half_width = xs[0].abs().max(xs[xs.len() - 1].abs());
        Ok(Self { shape: Shape::Samples { xs, values }, half_width: Some(half_width) })
    }

    /// `exp(-x^2)`.
    pub fn gaussian() -> Self {
        Self::function(|x| (-x * x).exp())
    }

    pub fn constant(value: f64) -> Self {
        Self::function(move |_| value)
    }

    pub fn with_half_width(mut self, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Parameter(format!("half-width {half_width} must be positive")));
        }
        self.half_width = Some(half_width);
        Ok(self)
    }

    pub fn half_width(&self) -> Option<f64> {
        self.half_width
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Function(f) => f(x),
            Shape::Samples { xs, values } => {
                let n = xs.len();
                if x < xs[0] || x > xs[n - 1] {
                    return 0.0;
                }
                let k = xs.partition_point(|&s| s <= x).clamp(1, n - 1);
                let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                values[k - 1] + w * (values[k] - values[k - 1])
            }
        }
    }
}

/// A Cauchy solution on one time level, with any truncation warnings.
#[derive(Debug, Clone)]
pub struct IvpSolution {
    pub field: GridField,
    /// Largest kernel mass lost to the truncation window over all x.
    pub max_tail_mass: f64,
    pub warnings: Vec<String>,
}

/// Integrates `exp(q) phi` over the truncation window; returns the value and the tail mass.
fn truncated_integral(q: &QuadraticExponent, phi: &InitialData, opts: &QuadOptions) -> Result<(f64, f64)> {
    q.check()?;
    let (mut lo, mut hi) = q.window(TRUNCATION_SIGMAS);
    let mut tail = 0.0;
    if let Some(l) = phi.half_width {
        tail = q.tail_mass(-l, l);
        lo = lo.max(-l);
        hi = hi.min(l);
    }
    Ok((q.integrate(|y| phi.eval(y), lo, hi, opts)?, tail))
}

fn tail_warnings(max_tail: f64) -> Vec<String> {
    if max_tail > TAIL_WARNING {
        vec![format!("kernel mass outside the truncation window reaches {max_tail:.3e}")]
    } else {
        Vec::new()
    }
}

/// `u(x, t) = int K0(x, y, t) phi(y) dy` on the points `xs`.
pub fn solve_ivp(kernel: &HeatKernel, phi: &InitialData, xs: &[f64], t: f64, opts: &QuadOptions) -> Result<IvpSolution> {
    let slice = kernel.slice(t)?;
    let rows: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|&x| truncated_integral(&slice.in_y(x), phi, opts))
        .collect::<Result<_>>()?;
    let max_tail = rows.iter().fold(0.0_f64, |m, r| m.max(r.1));
    let field = GridField::new(xs.to_vec(), vec![t], vec![rows.into_iter().map(|r| r.0).collect()])?;
    Ok(IvpSolution { field, max_tail_mass: max_tail, warnings: tail_warnings(max_tail) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub value: f64,
    pub warnings: Vec<String>,
}

/// `E_x[phi(X_t)] = int K0(x, y, t) phi(y) dy`.
///
/// Only a probabilistic expectation when `b = d = f = 0`; otherwise the
/// integral is still returned, with a warning.
pub fn expectation(kernel: &HeatKernel, phi: &InitialData, x: f64, t: f64, opts: &QuadOptions) -> Result<Expectation> {
    let slice = kernel.slice(t)?;
    let (value, tail) = truncated_integral(&slice.in_y(x), phi, opts)?;
    let mut warnings = tail_warnings(tail);
    if !kernel.coefficients().is_kolmogorov_type(t, 33) {
        warnings.push("b, d, f do not all vanish: the kernel is not a transition density".into());
    }
    Ok(Expectation { value, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    X,
    Y,
}

/// `int_{-L}^{L} K(s, 0, t) ds` (variable `X`) or `int K(0, s, t) ds` (variable `Y`).
pub fn normalization(kernel: &dyn KernelFn, t: f64, variable: Variable, half_width: f64) -> Result<f64> {
    if !(half_width > 0.0) {
        return Err(Error::Parameter(format!("half-width {half_width} must be positive")));
    }
    let mut failure = None;
    let opts = QuadOptions::default().tolerances(1e-14, 1e-12).pieces(64);
    let r = quad::integrate(
        |s| {
            let (x, y) = match variable {
                Variable::X => (s, 0.0),
                Variable::Y => (0.0, s),
            };
            match kernel.eval(x, y, t) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        -half_width,
        half_width,
        &opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// Solution through the change of variables
/// `u = mu^(-1/2) exp(alpha x^2 + delta x + kappa) v(beta x + eps, gamma)`,
/// with `v` solving `v_tau = v_xixi`, convolved with the standard heat kernel.
pub fn transform_solve(
    coeffs: &CoefficientSet,
    path: &dyn RiccatiPath,
    phi: &InitialData,
    xs: &[f64],
    t: f64,
    opts: &QuadOptions,
) -> Result<GridField> {
    coeffs.check_time(t)?;
    if !(t > 0.0) {
        return Err(Error::Domain { t, lo: 0.0, hi: coeffs.domain_end });
    }
    let init = path.init();
    let n = 64;
    let mut prev = init.gamma;
    for i in 1..=n {
        let g = path.state_at(t * i as f64 / n as f64)?.values.gamma;
        if !(g > prev) {
            return Err(Error::NonMonotone { t });
        }
        prev = g;
    }
    let v = path.state_at(t)?.values;
    if !(v.mu > 0.0 && init.mu > 0.0) {
        return Err(Error::Division(format!("mu must stay positive (mu(0) = {}, mu(t) = {})", init.mu, v.mu)));
    }
    if init.beta == 0.0 {
        return Err(Error::Parameter("beta(0) must be nonzero".into()));
    }
    let dg = v.gamma - init.gamma;
    let log_const = 0.5 * init.mu.ln() + init.beta.abs().ln()
        - 0.5 * (4.0 * std::f64::consts::PI * dg).ln()
        - 0.5 * v.mu.ln()
        - init.kappa;
    let row: Vec<f64> = xs
        .par_iter()
        .map(|&x| {
            let xi = v.beta * x + v.eps - init.eps;
            let q = QuadraticExponent {
                a2: -init.beta * init.beta / (4.0 * dg) - init.alpha,
                a1: init.beta * xi / (2.0 * dg) - init.delta,
                a0: log_const - xi * xi / (4.0 * dg) + v.alpha * x * x + v.delta * x + v.kappa,
            };
            truncated_integral(&q, phi, opts).map(|r| r.0)
        })
        .collect::<Result<_>>()?;
    GridField::new(xs.to_vec(), vec![t], vec![row])
}
