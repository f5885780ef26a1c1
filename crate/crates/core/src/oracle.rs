//! Finite-difference reference solvers on a truncated window, used only to
//! cross-check the kernel and Cole–Hopf pipelines.

use crate::burgers::BurgersProblem;
use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::{uniform, GridField};
use crate::kernel::InitialData;

/// `n` points on `[-half_width, half_width]` and time step `dt`
/// (shortened so that it divides the final time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSpec {
    pub half_width: f64,
    pub n: usize,
    pub dt: f64,
}

/// Growth bound that flags an unstable diffusion run.
pub const INSTABILITY_BOUND: f64 = 1e8;
/// Largest allowed advective Courant number.
pub const CFL_LIMIT: f64 = 0.5;

impl FdSpec {
    pub fn new(half_width: f64, n: usize, dt: f64) -> Result<Self> {
        let spec = Self { half_width, n, dt };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.n < 16 {
            return Err(Error::Parameter(format!("n = {} must be at least 16", self.n)));
        }
        if !(self.dt > 0.0) || !(self.half_width > 0.0) {
            return Err(Error::Parameter("dt and the half-width must be positive".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        uniform(-self.half_width, self.half_width, self.n)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    fn steps(&self, t_end: f64) -> (usize, f64) {
        let steps = (t_end / self.dt).ceil().max(1.0) as usize;
        (steps, t_end / steps as f64)
    }
}

/// Solves `l_i x_{i-1} + d_i x_i + u_i x_{i+1} = r_i` in place (Thomas algorithm).
fn thomas(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

/// Crank–Nicolson for `u_t = a u_xx - (g - c x) u_x + (d + f x - b x^2) u`
/// with central differences, coefficients at the time midpoint and
/// homogeneous Dirichlet boundaries. Returns the levels `t = 0` and `t_end`.
pub fn fd_diffusion(coeffs: &CoefficientSet, phi: &InitialData, spec: &FdSpec, t_end: f64) -> Result<GridField> {
    spec.check()?;
    coeffs.check_time(t_end)?;
    let xs = spec.xs();
    let (edge_l, edge_r) = (phi.eval(xs[0]), phi.eval(xs[spec.n - 1]));
    if edge_l.abs() > 1e-12 || edge_r.abs() > 1e-12 {
        return Err(Error::Parameter(format!(
            "initial data does not vanish at the window edges ({edge_l:e}, {edge_r:e})"
        )));
    }
    let (steps, dt) = spec.steps(t_end);
    let h = spec.dx();
    let n = spec.n;
    let mut u: Vec<f64> = xs.iter().map(|&x| phi.eval(x)).collect();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let u0 = u.clone();
    let watch = coeffs.is_kolmogorov_type(t_end, 33);
    let m = n - 2;
    let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        let k = coeffs.at(t_mid);
        for j in 0..m {
            let i = j + 1;
            let x = xs[i];
            let diff = k.a / (h * h);
            let adv = (k.g - k.c * x) / (2.0 * h);
            let (l, d, r) = (diff + adv, -2.0 * diff + k.d + k.f * x - k.b * x * x, diff - adv);
            lo[j] = -0.5 * dt * l;
            di[j] = 1.0 - 0.5 * dt * d;
            up[j] = -0.5 * dt * r;
            rhs[j] = u[i] + 0.5 * dt * (l * u[i - 1] + d * u[i] + r * u[i + 1]);
        }
        thomas(&lo, &mut di, &up, &mut rhs);
        u[1..n - 1].copy_from_slice(&rhs);
        let norm = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let t = (step + 1) as f64 * dt;
        if !norm.is_finite() {
            return Err(Error::NonFinite { what: "finite-difference solution", t });
        }
        if watch && norm > INSTABILITY_BOUND {
            return Err(Error::Unstable { t, norm });
        }
    }
    GridField::new(xs, vec![0.0, t_end], vec![u0, u])
}

/// Semi-implicit scheme for the Burgers-type equation: implicit diffusion,
/// explicit second-order upwind advection and sources, boundaries held at
/// the initial edge values. Returns the levels `t = 0` and `t_end`.
pub fn fd_burgers(prob: &BurgersProblem, spec: &FdSpec, t_end: f64) -> Result<GridField> {
    spec.check()?;
    let coeffs = &prob.coeffs;
    coeffs.check_time(t_end)?;
    let scale = prob.scale();
    let xs = spec.xs();
    let (steps, dt) = spec.steps(t_end);
    let h = spec.dx();
    let n = spec.n;
    // work with the general-form unknown w = v / scale
    let mut w: Vec<f64> = xs.iter().map(|&x| prob.v0.eval(x) / scale).collect();
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "initial data", t: 0.0 });
    }
    let w0 = w.clone();
    let m = n - 2;
    let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for step in 0..steps {
        let t = step as f64 * dt;
        let k = coeffs.at(t);
        let k1 = coeffs.at(t + dt);
        let mut courant = 0.0_f64;
        for j in 0..m {
            let i = j + 1;
            let x = xs[i];
            let speed = k.a * w[i] + k.g - k.c * x;
            courant = courant.max(speed.abs() * dt / h);
            let wx = if speed >= 0.0 {
                if i >= 2 {
                    (3.0 * w[i] - 4.0 * w[i - 1] + w[i - 2]) / (2.0 * h)
                } else {
                    (w[i] - w[i - 1]) / h
                }
            } else if i + 2 < n {
                (-3.0 * w[i] + 4.0 * w[i + 1] - w[i + 2]) / (2.0 * h)
            } else {
                (w[i + 1] - w[i]) / h
            };
            let explicit = speed * wx - k.c * w[i] + 2.0 * (k.f - 2.0 * k.b * x);
            let diff = dt * k1.a / (h * h);
            lo[j] = -diff;
            di[j] = 1.0 + 2.0 * diff;
            up[j] = -diff;
            rhs[j] = w[i] - dt * explicit;
        }
        if courant > CFL_LIMIT {
            return Err(Error::Cfl { number: courant, limit: CFL_LIMIT });
        }
        let diff = dt * k1.a / (h * h);
        rhs[0] += diff * w0[0];
        rhs[m - 1] += diff * w0[n - 1];
        thomas(&lo, &mut di, &up, &mut rhs);
        w[1..n - 1].copy_from_slice(&rhs);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "finite-difference solution", t: t + dt });
        }
    }
    let back = |row: Vec<f64>| row.into_iter().map(|v| v * scale).collect::<Vec<_>>();
    GridField::new(xs, vec![0.0, t_end], vec![back(w0), back(w)])
}

/// `sum u dx` of the last level.
pub fn mass(field: &GridField) -> Result<f64> {
    Ok(field.last_row().iter().sum::<f64>() * field.dx()?)
}

/// `(e_coarse - e_mid) / (e_mid - e_fine)`-style self-convergence ratio from
/// three runs with `(n, dt)`, `(2n-1, dt/2)` and `(4n-3, dt/4)`, compared on
/// the coarse nodes. Near 4 for a second-order scheme.
pub fn richardson_ratio<F>(run: F, spec: &FdSpec) -> Result<f64>
where
    F: Fn(&FdSpec) -> Result<GridField>,
{
    let s1 = *spec;
    let s2 = FdSpec { n: 2 * s1.n - 1, dt: s1.dt / 2.0, ..s1 };
    let s3 = FdSpec { n: 2 * s2.n - 1, dt: s2.dt / 2.0, ..s1 };
    let (u1, u2, u3) = (run(&s1)?, run(&s2)?, run(&s3)?);
    let (r1, r2, r3) = (u1.last_row(), u2.last_row(), u3.last_row());
    let mut e12 = 0.0_f64;
    let mut e23 = 0.0_f64;
    for i in 0..s1.n {
        e12 = e12.max((r1[i] - r2[2 * i]).abs());
        e23 = e23.max((r2[2 * i] - r3[4 * i]).abs());
    }
    if e23 == 0.0 {
        return Err(Error::Invalid("refinement produced identical solutions".into()));
    }
    Ok(e12 / e23)
}
