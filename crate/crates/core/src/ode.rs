//! Dormand–Prince 5(4) integrator with Hairer's continuous extension.
//!
//! Every accepted step keeps its five interpolation vectors so the solution
//! can be queried anywhere in the integration interval without re-integrating.
//! The interpolant is fourth-order accurate.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Abort with [`Error::BlowUp`] once any component exceeds this magnitude.
    pub blowup: Option<f64>,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_init: None,
            h_max: None,
            max_steps: 2_000_000,
            blowup: None,
        }
    }

    pub fn atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn h_init(mut self, h: f64) -> Self {
        self.h_init = Some(h);
        self
    }

    pub fn h_max(mut self, h: f64) -> Self {
        self.h_max = Some(h);
        self
    }

    pub fn blowup(mut self, threshold: f64) -> Self {
        self.blowup = Some(threshold);
        self
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

/// Piecewise-polynomial solution covering `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    /// Step boundaries; `times.len() == steps + 1`.
    times: Vec<f64>,
    /// Five interpolation vectors per step, flattened.
    rcont: Vec<f64>,
    /// State at each step boundary.
    nodes: Vec<f64>,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Accepted step boundaries, including both ends.
    pub fn step_points(&self) -> &[f64] {
        &self.times
    }

    pub fn num_steps(&self) -> usize {
        self.times.len() - 1
    }

    /// State stored at step boundary `k`.
    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.dim..(k + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.node(self.num_steps())
    }

    /// Index of the step containing `t` (clamped to the covered interval).
    fn locate(&self, t: f64) -> usize {
        let n = self.num_steps();
        if t <= self.times[0] {
            return 0;
        }
        if t >= self.times[n] {
            return n - 1;
        }
        // partition_point gives the first boundary strictly greater than t
        let idx = self.times.partition_point(|&s| s <= t);
        (idx - 1).min(n - 1)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let k = self.locate(t);
        let t0 = self.times[k];
        let h = self.times[k + 1] - t0;
        let theta = (t - t0) / h;
        let theta1 = 1.0 - theta;
        let base = k * 5 * self.dim;
        let d = self.dim;
        for i in 0..d {
            let r1 = self.rcont[base + i];
            let r2 = self.rcont[base + d + i];
            let r3 = self.rcont[base + 2 * d + i];
            let r4 = self.rcont[base + 3 * d + i];
            let r5 = self.rcont[base + 4 * d + i];
            out[i] = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn component(&self, t: f64, i: usize) -> f64 {
        let k = self.locate(t);
        let t0 = self.times[k];
        let h = self.times[k + 1] - t0;
        let theta = (t - t0) / h;
        let theta1 = 1.0 - theta;
        let base = k * 5 * self.dim;
        let d = self.dim;
        let r = |j: usize| self.rcont[base + j * d + i];
        r(0) + theta * (r(1) + theta1 * (r(2) + theta * (r(3) + theta1 * r(4))))
    }
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], opts: &OdeOptions) -> f64 {
    let n = y0.len() as f64;
    let sum: f64 = y0
        .iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| {
            let sk = opts.atol + opts.rtol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end > t0`.
///
/// `rhs(t, y, dydt)` writes the derivative into `dydt`.
pub fn integrate<F>(mut rhs: F, t0: f64, y0: &[f64], t_end: f64, opts: &OdeOptions) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(t_end > t0) {
        return Err(Error::Invalid(format!("integration interval [{t0}, {t_end}] is empty")));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::Parameter(format!(
            "tolerances must be positive (rtol = {}, atol = {})",
            opts.rtol, opts.atol
        )));
    }
    let dim = y0.len();
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "initial state", t: t0 });
    }

    let span = t_end - t0;
    let h_max = opts.h_max.unwrap_or(span);

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut ytmp = vec![0.0; dim];
    let mut y1 = vec![0.0; dim];
    let mut err = vec![0.0; dim];

    let mut y = y0.to_vec();
    let mut t = t0;
    rhs(t, &y, &mut k1);

    let mut h = match opts.h_init {
        Some(h) => h,
        None => initial_step(&mut rhs, t, &y, &k1, opts, &mut ytmp, &mut k2),
    }
    .min(h_max)
    .min(span);

    let mut times = vec![t0];
    let mut nodes = y0.to_vec();
    let mut rcont = Vec::new();
    let mut steps = 0usize;
    let mut last_rejected = false;

    loop {
        if steps >= opts.max_steps {
            return Err(Error::StepBudget { t, max_steps: opts.max_steps });
        }
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }

        for i in 0..dim {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &ytmp, &mut k3);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &ytmp, &mut k4);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &ytmp, &mut k5);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_end } else { t + h };
        rhs(t_new, &ytmp, &mut k6);
        for i in 0..dim {
            y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t_new, &y1, &mut k7);
        for i in 0..dim {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }

        let en = error_norm(&y, &y1, &err, opts);
        if !en.is_finite() {
            if y1.iter().any(|v| !v.is_finite()) && opts.blowup.is_some() {
                return Err(Error::BlowUp { t });
            }
            h *= 0.2;
            last_rejected = true;
            continue;
        }

        if en <= 1.0 {
            // dense output coefficients for this step
            for i in 0..dim {
                rcont.push(y[i]);
            }
            for i in 0..dim {
                rcont.push(y1[i] - y[i]);
            }
            for i in 0..dim {
                rcont.push(h * k1[i] - (y1[i] - y[i]));
            }
            for i in 0..dim {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont.push(ydiff - h * k7[i] - bspl);
            }
            for i in 0..dim {
                rcont.push(h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]));
            }

            t = t_new;
            y.copy_from_slice(&y1);
            k1.copy_from_slice(&k7);
            times.push(t);
            nodes.extend_from_slice(&y);
            steps += 1;

            if let Some(limit) = opts.blowup {
                if y.iter().any(|v| v.abs() > limit) {
                    return Err(Error::BlowUp { t });
                }
            }
            if last {
                break;
            }

            let mut fac = 0.9 * en.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(h_max);
            last_rejected = false;
        } else {
            let fac = (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
            last_rejected = true;
        }
    }

    Ok(DenseSolution { dim, times, rcont, nodes })
}

/// Starting step from the Hairer–Wanner heuristic.
fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    opts: &OdeOptions,
    ytmp: &mut [f64],
    f1: &mut [f64],
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y.len() as f64;
    let sk: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / dim).sqrt();
    let d1 = (f0.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / dim).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for i in 0..y.len() {
        ytmp[i] = y[i] + h0 * f0[i];
    }
    rhs(t + h0, ytmp, f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / dim)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
