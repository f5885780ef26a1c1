//! Burgers-type equations through the Cole–Hopf substitution `v = -2 u_x / u`.
//!
//! If `u` solves the diffusion-type equation then `v` solves
//!
//! ```text
//! v_t + a (v v_x - v_xx) + (g - c x) v_x - c v + 2 (f - 2 b x) = 0.
//! ```
//!
//! The classical viscous equation `v_t + v v_x = a v_xx` is the same equation
//! for `v / a` with only `a` nonzero.

use std::sync::Arc;

use rayon::prelude::*;

use crate::coefficients::{Coefficient, CoefficientSet};
use crate::error::{Error, Result};
use crate::grid::{d1_4th, d2_4th, dt_central, GridField};
use crate::kernel::{HeatKernel, InitialData, QuadraticExponent, TRUNCATION_SIGMAS};
use crate::ode::{self, DenseSolution, OdeOptions};
use crate::quad::{self, QuadOptions};

/// `v = -2 u_x / u` row by row, with fourth-order differences in x.
pub fn cole_hopf(u: &GridField) -> Result<GridField> {
    let h = u.dx()?;
    let mut values = Vec::with_capacity(u.ts.len());
    for row in &u.values {
        if let Some(i) = row.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonPositive { x: u.xs[i], value: row[i] });
        }
        let ux = d1_4th(row, h)?;
        values.push(ux.iter().zip(row).map(|(d, v)| -2.0 * d / v).collect());
    }
    GridField::new(u.xs.clone(), u.ts.clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurgersForm {
    /// The equation induced by the six coefficients.
    General,
    /// `v_t + v v_x = a v_xx` with constant `a`.
    Viscous,
}

/// Initial-value problem for a Burgers-type equation.
#[derive(Debug, Clone)]
pub struct BurgersProblem {
    pub coeffs: CoefficientSet,
    pub v0: InitialData,
    pub form: BurgersForm,
}

impl BurgersProblem {
    pub fn general(coeffs: CoefficientSet, v0: InitialData) -> Self {
        Self { coeffs, v0, form: BurgersForm::General }
    }

    pub fn viscous(a: f64, v0: InitialData, domain_end: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Parameter(format!("viscosity a = {a} must be positive")));
        }
        Ok(Self {
            coeffs: CoefficientSet::constant(a, 0.0, 0.0, 0.0, 0.0, 0.0, domain_end),
            v0,
            form: BurgersForm::Viscous,
        })
    }

    /// Factor between this problem's `v` and the general-form `v`.
    pub fn scale(&self) -> f64 {
        match self.form {
            BurgersForm::General => 1.0,
            BurgersForm::Viscous => self.coeffs.a.eval(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersOptions {
    pub quad: QuadOptions,
    /// Step of the x-stencil for the log-derivative; defaults to `1e-3 min(s, 1)`
    /// with `s` the kernel width.
    pub stencil_step: Option<f64>,
    /// Tolerance for the characteristic and Riccati solves.
    pub tol: f64,
}

impl Default for BurgersOptions {
    fn default() -> Self {
        Self { quad: QuadOptions::default().tolerances(1e-14, 1e-12), stencil_step: None, tol: 1e-12 }
    }
}

/// Running integral `W(y) = int_0^y v0` on cells of fixed width.
struct Antiderivative<'a> {
    v0: &'a InitialData,
    h: f64,
    j_min: i64,
    cum: Vec<f64>,
}

impl<'a> Antiderivative<'a> {
    const CELL: f64 = 0.05;

    fn new(v0: &'a InitialData, lo: f64, hi: f64) -> Self {
        let h = Self::CELL;
        let j_min = (lo.min(0.0) / h).floor() as i64 - 1;
        let j_max = (hi.max(0.0) / h).ceil() as i64 + 1;
        let n = (j_max - j_min + 1) as usize;
        let mut cum = vec![0.0; n];
        let zero = (-j_min) as usize;
        let cell = |j: i64| quad::gk21(|y| v0.eval(y), j as f64 * h, (j + 1) as f64 * h).0;
        for k in zero + 1..n {
            cum[k] = cum[k - 1] + cell(j_min + k as i64 - 1);
        }
        for k in (0..zero).rev() {
            cum[k] = cum[k + 1] - cell(j_min + k as i64);
        }
        Self { v0, h, j_min, cum }
    }

    fn eval(&self, y: f64) -> f64 {
        let j = ((y / self.h).floor() as i64).clamp(self.j_min, self.j_min + self.cum.len() as i64 - 2);
        let y0 = j as f64 * self.h;
        self.cum[(j - self.j_min) as usize] + quad::gk21(|s| self.v0.eval(s), y0, y).0
    }
}

fn max_abs_on<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let n = 400;
    (0..=n).map(|i| f(lo + (hi - lo) * i as f64 / n as f64).abs()).fold(0.0, f64::max)
}

/// `v(x, t) = -2 d/dx ln int K0(x, y, t) exp(-W(y) / 2) dy` with `W` the
/// antiderivative of `v0`; for the viscous form `W` is `int v0 / a` and the
/// prefactor `-2a`.
///
/// Inner integrals are computed on an adaptive partition chosen at each `x`
/// and reused across the stencil `x +- h, x +- 2h`, so the differenced
/// log-values share their quadrature error.
pub fn solve_burgers_ivp(prob: &BurgersProblem, xs: &[f64], t: f64, opts: &BurgersOptions) -> Result<GridField> {
    let kernel = HeatKernel::new(&prob.coeffs, opts.tol)?;
    let slice = kernel.slice(t)?;
    let scale = prob.scale();
    let inner = 0.5 / scale;
    let beta0 = slice.k.beta0;

    struct Plan {
        h: f64,
        lo: f64,
        hi: f64,
    }
    let base: Vec<(QuadraticExponent, f64)> = xs
        .iter()
        .map(|&x| {
            let q = slice.in_y(x);
            q.check().map(|_| (q, q.std_dev()))
        })
        .collect::<Result<_>>()?;
    // mean shift of the y-Gaussian across the stencil
    let plans0: Vec<(f64, f64, f64)> = base
        .iter()
        .map(|(q, s)| {
            let h = opts.stencil_step.unwrap_or(1e-3 * s.min(1.0));
            let shift = (2.0 * h * beta0 * s * s).abs();
            (h, q.mean(), TRUNCATION_SIGMAS * s + shift + 2.0 * s)
        })
        .collect();
    // tilt by exp(-W/2a) moves the peak by at most max|v0|/(2a) s^2; sample twice to settle
    let mut tilt = 0.0;
    for _ in 0..2 {
        let lo = plans0
            .iter()
            .zip(&base)
            .map(|((_, m, w), (_, s))| m - w - tilt * s * s)
            .fold(f64::INFINITY, f64::min);
        let hi = plans0
            .iter()
            .zip(&base)
            .map(|((_, m, w), (_, s))| m + w + tilt * s * s)
            .fold(f64::NEG_INFINITY, f64::max);
        tilt = inner * max_abs_on(|y| prob.v0.eval(y), lo, hi);
    }
    let plans: Vec<Plan> = plans0
        .iter()
        .zip(&base)
        .map(|(&(h, m, w), (_, s))| {
            let reach = w + tilt * s * s;
            Plan { h, lo: m - reach, hi: m + reach }
        })
        .collect();
    let lo = plans.iter().map(|p| p.lo).fold(f64::INFINITY, f64::min);
    let hi = plans.iter().map(|p| p.hi).fold(f64::NEG_INFINITY, f64::max);
    let w = Antiderivative::new(&prob.v0, lo, hi);

    let row: Vec<f64> = xs
        .par_iter()
        .zip(&plans)
        .map(|(&x, plan)| {
            let exponent = |xp: f64, y: f64| {
                let q = slice.in_y(xp);
                q.a2 * y * y + q.a1 * y + q.a0 - inner * w.eval(y)
            };
            let n = 200;
            let shift = (0..=n)
                .map(|i| exponent(x, plan.lo + (plan.hi - plan.lo) * i as f64 / n as f64))
                .fold(f64::NEG_INFINITY, f64::max);
            let centre = quad::integrate(|y| (exponent(x, y) - shift).exp(), plan.lo, plan.hi, &opts.quad)?;
            let log_at = |xp: f64| -> Result<f64> {
                let v = quad::fixed(|y| (exponent(xp, y) - shift).exp(), &centre.partition);
                if !(v > 0.0) {
                    return Err(Error::NonPositive { x: xp, value: v });
                }
                Ok(v.ln())
            };
            let h = plan.h;
            let d = (-log_at(x + 2.0 * h)? + 8.0 * log_at(x + h)? - 8.0 * log_at(x - h)? + log_at(x - 2.0 * h)?)
                / (12.0 * h);
            Ok(-2.0 * scale * d)
        })
        .collect::<Result<_>>()?;
    GridField::new(xs.to_vec(), vec![t], vec![row])
}

/// Pointwise residual of a Burgers-type equation on interior grid points.
#[derive(Debug, Clone)]
pub struct Residual {
    /// Residual on the interior x-points (two dropped at each edge) and the
    /// time levels where `v_t` is available.
    pub field: GridField,
    pub max_abs: f64,
    /// Largest sum of absolute values of the individual terms.
    pub scale: f64,
}

struct Derivs {
    t: f64,
    x: f64,
    v: f64,
    vx: f64,
    vxx: f64,
}

/// Evaluates `terms` (returning the residual without `v_t` and the absolute
/// sum of those terms) at every interior point.
fn residual_with<F>(v: &GridField, terms: F) -> Result<Residual>
where
    F: Fn(&Derivs) -> (f64, f64),
{
    let nt = v.ts.len();
    if nt < 2 {
        return Err(Error::TimeLevels { need: 2, got: nt });
    }
    let h = v.dx()?;
    let nx = v.xs.len();
    let spatial = |j: usize| -> Result<(Vec<f64>, Vec<f64>)> { Ok((d1_4th(&v.values[j], h)?, d2_4th(&v.values[j], h)?)) };
    let mut ts = Vec::new();
    let mut rows = Vec::new();
    let mut max_abs = 0.0_f64;
    let mut scale = 0.0_f64;
    let mut push = |t: f64, row: Vec<(f64, f64)>| {
        ts.push(t);
        rows.push(row.iter().map(|r| r.0).collect::<Vec<_>>());
        for (r, s) in row {
            max_abs = max_abs.max(r.abs());
            scale = scale.max(s);
        }
    };
    let interior = 2..nx.saturating_sub(2);
    if nt == 2 {
        // midpoint in time: average the spatial terms of both levels
        let dt = v.ts[1] - v.ts[0];
        let (d0, d1) = (spatial(0)?, spatial(1)?);
        let row = interior
            .clone()
            .map(|i| {
                let vt = (v.values[1][i] - v.values[0][i]) / dt;
                let mut sum = 0.0;
                let mut abs = vt.abs();
                for (j, d) in [(0, &d0), (1, &d1)] {
                    let (r, s) = terms(&Derivs { t: v.ts[j], x: v.xs[i], v: v.values[j][i], vx: d.0[i], vxx: d.1[i] });
                    sum += 0.5 * r;
                    abs += 0.5 * s;
                }
                (vt + sum, abs)
            })
            .collect();
        push(0.5 * (v.ts[0] + v.ts[1]), row);
    } else {
        for j in 1..nt - 1 {
            let vt = dt_central(&v.values, &v.ts, j);
            let (vx, vxx) = spatial(j)?;
            let row = interior
                .clone()
                .map(|i| {
                    let (r, s) = terms(&Derivs { t: v.ts[j], x: v.xs[i], v: v.values[j][i], vx: vx[i], vxx: vxx[i] });
                    (vt[i] + r, s + vt[i].abs())
                })
                .collect();
            push(v.ts[j], row);
        }
    }
    let field = GridField::new(v.xs[interior].to_vec(), ts, rows)?;
    Ok(Residual { field, max_abs, scale })
}

/// Residual of `v_t + a (v v_x - v_xx) + (g - c x) v_x - c v + 2 (f - 2 b x)`.
///
/// Needs at least two time levels: with three or more, `v_t` is central on
/// the interior levels; with two, the residual is taken at the midpoint.
pub fn burgers_residual(v: &GridField, coeffs: &CoefficientSet) -> Result<Residual> {
    residual_with(v, |d| {
        let k = coeffs.at(d.t);
        let parts = [
            k.a * d.v * d.vx,
            -k.a * d.vxx,
            (k.g - k.c * d.x) * d.vx,
            -k.c * d.v,
            2.0 * (k.f - 2.0 * k.b * d.x),
        ];
        (parts.iter().sum(), parts.iter().map(|p| p.abs()).sum())
    })
}

/// Residual of `v_t + v v_x - a v_xx`.
pub fn viscous_burgers_residual(v: &GridField, a: f64) -> Result<Residual> {
    residual_with(v, |d| {
        let parts = [d.v * d.vx, -a * d.vxx];
        (parts.iter().sum(), parts.iter().map(|p| p.abs()).sum())
    })
}

/// `-2 d/dx [(u_t - Q u) / u]`, with `Q` the spatial operator of the
/// diffusion-type equation, on the same points and levels as
/// [`burgers_residual`] of `cole_hopf(u)`.
pub fn linearization_defect(u: &GridField, coeffs: &CoefficientSet) -> Result<GridField> {
    let nt = u.ts.len();
    if nt < 3 {
        return Err(Error::TimeLevels { need: 3, got: nt });
    }
    let h = u.dx()?;
    let nx = u.xs.len();
    let mut rows = Vec::new();
    for j in 1..nt - 1 {
        let t = u.ts[j];
        let k = coeffs.at(t);
        let ut = dt_central(&u.values, &u.ts, j);
        let ux = d1_4th(&u.values[j], h)?;
        let uxx = d2_4th(&u.values[j], h)?;
        let w: Vec<f64> = (0..nx)
            .map(|i| {
                let (x, v) = (u.xs[i], u.values[j][i]);
                let qu = k.a * uxx[i] - (k.g - k.c * x) * ux[i] + (k.d + k.f * x - k.b * x * x) * v;
                (ut[i] - qu) / v
            })
            .collect();
        let wx = d1_4th(&w, h)?;
        rows.push(wx[2..nx - 2].iter().map(|d| -2.0 * d).collect());
    }
    GridField::new(u.xs[2..nx - 2].to_vec(), u.ts[1..nt - 1].to_vec(), rows)
}

/// Constants of the traveling-wave ansatz `v = beta(t) F(beta(t) x + gamma(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelingWaveSpec {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub beta_init: f64,
    pub gamma_init: f64,
    /// Window `[z_start, z_end]` on which `F` is computed.
    pub z_start: f64,
    pub z_end: f64,
    /// `F(z_start)`.
    pub f_start: f64,
}

impl TravelingWaveSpec {
    fn check(&self) -> Result<()> {
        let all = [self.c0, self.c1, self.c2, self.c3, self.c4, self.beta_init, self.gamma_init, self.f_start];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("traveling-wave constants must be finite".into()));
        }
        if self.beta_init == 0.0 {
            return Err(Error::Parameter("beta(0) must be nonzero".into()));
        }
        if !(self.z_end > self.z_start) {
            return Err(Error::Parameter(format!("empty z-window [{}, {}]", self.z_start, self.z_end)));
        }
        Ok(())
    }

    fn quadratic(&self, z: f64) -> f64 {
        self.c2 * z * z + self.c3 * z + self.c4
    }
}

/// A traveling-wave solution together with the `b, f, g` that make it exact.
#[derive(Debug, Clone)]
pub struct TravelingWave {
    spec: TravelingWaveSpec,
    /// `(beta, gamma)` on `[0, T]`.
    path: Arc<DenseSolution>,
    /// `(mu, mu')` on the z-window, `F = -2 mu' / mu`.
    mu: DenseSolution,
    coeffs: CoefficientSet,
}

/// Integrates `beta' = c beta`, `gamma' = c0 a beta^2` and the linear equation
/// `mu'' - (c0 + c1) mu' + (c2 z^2 + c3 z + c4) mu / 2 = 0` whose log-derivative
/// gives `F`. Only `a` and `c` of `coeffs` are used.
pub fn traveling_wave(spec: &TravelingWaveSpec, coeffs: &CoefficientSet, tol: f64) -> Result<TravelingWave> {
    spec.check()?;
    let opts = OdeOptions::with_tol(tol).atol(tol * 1e-2);
    let c0 = spec.c0;
    let path = ode::integrate(
        |t, y, dy| {
            let (a, c) = (coeffs.a.eval(t), coeffs.c.eval(t));
            dy[0] = c * y[0];
            dy[1] = c0 * a * y[0] * y[0];
        },
        0.0,
        &[spec.beta_init, spec.gamma_init],
        coeffs.domain_end,
        &opts,
    )?;
    let s = *spec;
    let mu = ode::integrate(
        |z, y, dy| {
            dy[0] = y[1];
            dy[1] = (s.c0 + s.c1) * y[1] - 0.5 * s.quadratic(z) * y[0];
        },
        spec.z_start,
        &[1.0, -0.5 * spec.f_start],
        spec.z_end,
        &opts,
    )?;
    if let Some(z) = first_sign_change(&mu) {
        return Err(Error::Pole { z });
    }
    let path = Arc::new(path);
    let a = coeffs.a.clone();
    let induced = |f: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>| {
        let (path, a) = (path.clone(), a.clone());
        Coefficient::new(move |t| {
            let mut y = [0.0; 2];
            path.eval_into(t, &mut y);
            f(a.eval(t), y[0], y[1])
        })
    };
    let (c1, c2, c3) = (spec.c1, spec.c2, spec.c3);
    let induced_coeffs = CoefficientSet {
        a: coeffs.a.clone(),
        b: induced(Arc::new(move |a, b, _| -0.5 * c2 * a * b.powi(4))),
        c: coeffs.c.clone(),
        d: Coefficient::zero(),
        f: induced(Arc::new(move |a, b, g| 0.5 * a * b.powi(3) * (2.0 * c2 * g + c3))),
        g: induced(Arc::new(move |a, b, _| c1 * a * b)),
        da: coeffs.da.clone(),
        dd: Coefficient::zero(),
        domain_end: coeffs.domain_end,
    };
    Ok(TravelingWave { spec: *spec, path, mu, coeffs: induced_coeffs })
}

fn first_sign_change(mu: &DenseSolution) -> Option<f64> {
    let ts = mu.step_points();
    for k in 1..ts.len() {
        if mu.node(k)[0] <= 0.0 {
            let (mut lo, mut hi) = (ts[k - 1], ts[k]);
            while hi - lo > 1e-13 * hi.abs().max(1.0) {
                let mid = 0.5 * (lo + hi);
                if mu.component(mid, 0) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
    }
    None
}

impl TravelingWave {
    pub fn spec(&self) -> &TravelingWaveSpec {
        &self.spec
    }

    /// `(beta(t), gamma(t))`.
    pub fn beta_gamma(&self, t: f64) -> Result<(f64, f64)> {
        self.coeffs.check_time(t)?;
        let mut y = [0.0; 2];
        self.path.eval_into(t, &mut y);
        Ok((y[0], y[1]))
    }

    pub fn profile(&self, z: f64) -> Result<f64> {
        if !(self.spec.z_start..=self.spec.z_end).contains(&z) {
            return Err(Error::Invalid(format!(
                "z = {z} outside the window [{}, {}]",
                self.spec.z_start, self.spec.z_end
            )));
        }
        let mut y = [0.0; 2];
        self.mu.eval_into(z, &mut y);
        Ok(-2.0 * y[1] / y[0])
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let (beta, gamma) = self.beta_gamma(t)?;
        Ok(beta * self.profile(beta * x + gamma)?)
    }

    /// `a`, `c` as given and the induced `b = -c2 a beta^4 / 2`,
    /// `f = a beta^3 (2 c2 gamma + c3) / 2`, `g = c1 a beta`.
    pub fn induced_coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    /// Largest difference over the window between the linear route for `F`
    /// and direct integration of `F' = (c0 + c1) F + F^2 / 2 + c2 z^2 + c3 z + c4`.
    pub fn riccati_cross_check(&self, tol: f64) -> Result<f64> {
        let s = self.spec;
        let direct = ode::integrate(
            |z, y, dy| dy[0] = (s.c0 + s.c1) * y[0] + 0.5 * y[0] * y[0] + s.quadratic(z),
            s.z_start,
            &[s.f_start],
            s.z_end,
            &OdeOptions::with_tol(tol).blowup(1e12),
        )?;
        let n = 256;
        let mut worst = 0.0_f64;
        for i in 0..=n {
            let z = s.z_start + (s.z_end - s.z_start) * i as f64 / n as f64;
            worst = worst.max((direct.component(z, 0) - self.profile(z)?).abs());
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatemanKind {
    /// `v + V = A tan(A (x + V t - c) / (2a))`
    Tan,
    /// `(A - v - V) / (A + v + V) = exp(A (x + V t - c) / a)`
    Kink,
}

/// Bateman's traveling waves of `v_t + v v_x = a v_xx`, moving with speed `-V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatemanWave {
    pub amplitude: f64,
    pub speed: f64,
    pub viscosity: f64,
    pub shift: f64,
    pub kind: BatemanKind,
}

impl BatemanWave {
    pub const POLE_TOL: f64 = 1e-6;

    pub fn new(amplitude: f64, speed: f64, viscosity: f64, shift: f64, kind: BatemanKind) -> Result<Self> {
        if !(amplitude > 0.0 && viscosity > 0.0 && speed.is_finite() && shift.is_finite()) {
            return Err(Error::Parameter(format!(
                "Bateman wave needs A > 0, a > 0 (got A = {amplitude}, a = {viscosity})"
            )));
        }
        Ok(Self { amplitude, speed, viscosity, shift, kind })
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let (a, v, nu) = (self.amplitude, self.speed, self.viscosity);
        let arg = a * (x + v * t - self.shift) / (2.0 * nu);
        match self.kind {
            BatemanKind::Tan => {
                let off = (arg / std::f64::consts::PI - 0.5).round();
                let pole = (off + 0.5) * std::f64::consts::PI;
                if (arg - pole).abs() < Self::POLE_TOL {
                    return Err(Error::Pole { z: x });
                }
                Ok(-v + a * arg.tan())
            }
            // (A - w)/(A + w) = e^{2 arg} solved for w = v + V
            BatemanKind::Kink => Ok(-v - a * arg.tanh()),
        }
    }

    /// Limits as `x + V t -> -inf` and `+inf` (kink only).
    pub fn kink_limits(&self) -> (f64, f64) {
        (self.amplitude - self.speed, -self.amplitude - self.speed)
    }

    pub fn initial_data(&self) -> InitialData {
        let w = *self;
        InitialData::function(move |x| w.eval(x, 0.0).unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform;

    #[test]
    fn cole_hopf_elementary() {
        let xs = uniform(-2.0, 2.0, 401);
        let exp = GridField::from_fn(&xs, &[0.0], |x, _| (-x).exp());
        for v in cole_hopf(&exp).unwrap().last_row() {
            assert!((v - 2.0).abs() < 1e-5);
        }
        let gauss = GridField::from_fn(&xs, &[0.0], |x, _| (-x * x / 2.0).exp());
        let v = cole_hopf(&gauss).unwrap();
        for (x, v) in xs.iter().zip(v.last_row()) {
            assert!((v - 2.0 * x).abs() < 1e-4, "{x}: {v}");
        }
        let c = GridField::from_fn(&xs, &[0.0], |_, _| 3.0);
        assert!(cole_hopf(&c).unwrap().max_abs() < 1e-12);
        let neg = GridField::from_fn(&xs, &[0.0], |x, _| x);
        assert!(matches!(cole_hopf(&neg), Err(Error::NonPositive { .. })));
    }

    fn bateman_field(w: &BatemanWave, xs: &[f64], ts: &[f64]) -> GridField {
        GridField::from_fn(xs, ts, |x, t| w.eval(x, t).unwrap())
    }

    #[test]
    fn bateman_waves_solve_viscous_burgers() {
        let xs = uniform(-1.0, 1.0, 401);
        let ts = [0.3 - 1e-4, 0.3, 0.3 + 1e-4];
        for kind in [BatemanKind::Tan, BatemanKind::Kink] {
            let w = BatemanWave::new(1.0, 0.4, 0.7, 0.2, kind).unwrap();
            let r = viscous_burgers_residual(&bateman_field(&w, &xs, &ts), 0.7).unwrap();
            assert!(r.max_abs <= 1e-6 * r.scale, "{kind:?}: {} vs {}", r.max_abs, r.scale);
        }
    }

    #[test]
    fn kink_limits_and_poles() {
        let w = BatemanWave::new(1.5, 0.5, 0.1, 0.0, BatemanKind::Kink).unwrap();
        let (left, right) = w.kink_limits();
        assert!((w.eval(-20.0, 0.0).unwrap() - left).abs() < 1e-12);
        assert!((w.eval(20.0, 0.0).unwrap() - right).abs() < 1e-12);
        let tan = BatemanWave::new(1.0, 0.0, 0.5, 0.0, BatemanKind::Tan).unwrap();
        // argument x is a pole at x = pi/2
        assert!(matches!(tan.eval(std::f64::consts::FRAC_PI_2, 0.0), Err(Error::Pole { .. })));
        assert!(tan.eval(1.0, 0.0).is_ok());
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let xs = uniform(-1.0, 1.0, 21);
        let z = GridField::from_fn(&xs, &[0.0, 0.1], |_, _| 0.0);
        let c = CoefficientSet::constant(1.0, 0.0, 0.3, 0.2, 0.0, 0.5, 1.0);
        assert_eq!(burgers_residual(&z, &c).unwrap().max_abs, 0.0);
        let one = GridField::from_fn(&xs, &[0.0], |_, _| 0.0);
        assert!(matches!(burgers_residual(&one, &c), Err(Error::TimeLevels { .. })));
    }

    #[test]
    fn separable_traveling_wave() {
        // c0 + c1 = 0, c2 = c3 = c4 = 0: F = -2 / (z - z0) with z0 = z_start + 2 / F0
        let spec = TravelingWaveSpec {
            c0: 0.5,
            c1: -0.5,
            c2: 0.0,
            c3: 0.0,
            c4: 0.0,
            beta_init: 1.0,
            gamma_init: 0.0,
            z_start: -1.0,
            z_end: 3.0,
            f_start: 0.5,
        };
        let coeffs = CoefficientSet::constant(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let w = traveling_wave(&spec, &coeffs, 1e-12).unwrap();
        let z0 = -1.0 + 2.0 / 0.5;
        for z in [-1.0, 0.0, 1.5, 2.9] {
            assert!((w.profile(z).unwrap() + 2.0 / (z - z0)).abs() <= 1e-10);
        }
        let past = TravelingWaveSpec { z_end: 4.0, ..spec };
        match traveling_wave(&past, &coeffs, 1e-12) {
            Err(Error::Pole { z }) => assert!((z - z0).abs() < 1e-9),
            other => panic!("expected a pole, got {other:?}"),
        }
    }

    #[test]
    fn traveling_wave_logistic_case() {
        // c = 0, a = 1, c0 = 1: beta = 1, gamma = t, F' = F + F^2 / 2
        let spec = TravelingWaveSpec {
            c0: 1.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            c4: 0.0,
            beta_init: 1.0,
            gamma_init: 0.0,
            z_start: -3.0,
            z_end: 4.0,
            f_start: -1.0,
        };
        let coeffs = CoefficientSet::constant(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let w = traveling_wave(&spec, &coeffs, 1e-12).unwrap();
        let (b, g) = w.beta_gamma(0.6).unwrap();
        assert!((b - 1.0).abs() < 1e-12 && (g - 0.6).abs() < 1e-12);
        // F = -2 / (1 + C e^{-z}) with F(-3) = -1
        let cc = (-3.0f64).exp();
        for z in [-2.0, 0.0, 3.0] {
            let exact = -2.0 / (1.0 + cc * (-z as f64).exp());
            assert!((w.profile(z).unwrap() - exact).abs() < 1e-10);
        }
        assert!(w.riccati_cross_check(1e-12).unwrap() < 1e-9);
    }

    #[test]
    fn traveling_wave_residual_with_induced_coefficients() {
        let spec = TravelingWaveSpec {
            c0: 0.3,
            c1: 0.2,
            c2: 0.05,
            c3: 0.1,
            c4: -0.4,
            beta_init: 0.8,
            gamma_init: 0.1,
            z_start: -2.0,
            z_end: 2.0,
            f_start: 0.3,
        };
        let mut coeffs = CoefficientSet::constant(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        coeffs.a = Coefficient::new(|t| 1.0 + 0.2 * t);
        coeffs.da = Coefficient::constant(0.2);
        coeffs.c = Coefficient::new(|t| 0.1 - 0.1 * t);
        let w = traveling_wave(&spec, &coeffs, 1e-13).unwrap();
        let xs = uniform(-1.0, 1.0, 201);
        let ts = [0.5 - 1e-4, 0.5, 0.5 + 1e-4];
        let field = GridField::from_fn(&xs, &ts, |x, t| w.eval(x, t).unwrap());
        let r = burgers_residual(&field, w.induced_coefficients()).unwrap();
        assert!(r.max_abs <= 1e-6 * r.scale, "{} vs {}", r.max_abs, r.scale);
        assert!(w.riccati_cross_check(1e-12).unwrap() < 1e-8);
    }
}
