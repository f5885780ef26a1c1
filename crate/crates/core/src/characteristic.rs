//! Standard solutions of the characteristic equation `mu'' - tau mu' - 4 sigma mu = 0`.

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::ode::{self, DenseSolution, OdeOptions};
use crate::quad::{self, QuadOptions};

const MU0: usize = 0;
const DMU0: usize = 1;
const MU1: usize = 2;
const DMU1: usize = 3;
const H: usize = 4;

/// Values of the standard solutions at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicState {
    pub mu0: f64,
    pub dmu0: f64,
    pub mu1: f64,
    pub dmu1: f64,
    pub h: f64,
}

/// Dense solution of the augmented system `(mu0, mu0', mu1, mu1', h)`.
///
/// `mu0(0) = 0`, `mu0'(0) = 2 a(0)`, `mu1(0) = 1`, `mu1'(0) = 0`, `h(0) = 1`
/// with `h' = (c - 2d) h`.
#[derive(Debug, Clone)]
pub struct CharacteristicSolution {
    dense: DenseSolution,
    a0: f64,
    domain_end: f64,
    first_zero_of_mu0: Option<f64>,
}

impl CharacteristicSolution {
    pub fn mu1_at_0(&self) -> f64 {
        1.0
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    /// Smallest `t > 0` with `mu0(t) = 0`, if any.
    pub fn first_zero_of_mu0(&self) -> Option<f64> {
        self.first_zero_of_mu0
    }

    /// End of the interval on which the kernel representation is valid.
    pub fn valid_end(&self) -> f64 {
        self.first_zero_of_mu0.unwrap_or(self.domain_end)
    }

    pub fn state(&self, t: f64) -> CharacteristicState {
        let mut y = [0.0; 5];
        self.dense.eval_into(t, &mut y);
        CharacteristicState { mu0: y[MU0], dmu0: y[DMU0], mu1: y[MU1], dmu1: y[DMU1], h: y[H] }
    }

    pub fn mu0(&self, t: f64) -> f64 {
        self.dense.component(t, MU0)
    }

    pub fn dmu0(&self, t: f64) -> f64 {
        self.dense.component(t, DMU0)
    }

    pub fn mu1(&self, t: f64) -> f64 {
        self.dense.component(t, MU1)
    }

    pub fn dmu1(&self, t: f64) -> f64 {
        self.dense.component(t, DMU1)
    }

    pub fn h(&self, t: f64) -> f64 {
        self.dense.component(t, H)
    }

    /// Accepted integrator step boundaries.
    pub fn step_points(&self) -> &[f64] {
        self.dense.step_points()
    }
}

/// Integrates the characteristic system on `[0, t_end]` with local error `tol`.
pub fn solve_characteristic(coeffs: &CoefficientSet, t_end: f64, tol: f64) -> Result<CharacteristicSolution> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tol = {tol} must be positive")));
    }
    if !(t_end > 0.0) || t_end > coeffs.domain_end {
        return Err(Error::Domain { t: t_end, lo: 0.0, hi: coeffs.domain_end });
    }
    let a0 = coeffs.a.eval(0.0);
    if a0 == 0.0 {
        return Err(Error::Division("a(0) = 0".into()));
    }
    let mut bad_time = None;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let v = coeffs.at(t);
        if v.a == 0.0 && bad_time.is_none() {
            bad_time = Some(t);
        }
        let tau = v.tau();
        let sigma4 = 4.0 * v.sigma();
        dy[MU0] = y[DMU0];
        dy[DMU0] = tau * y[DMU0] + sigma4 * y[MU0];
        dy[MU1] = y[DMU1];
        dy[DMU1] = tau * y[DMU1] + sigma4 * y[MU1];
        dy[H] = (v.c - 2.0 * v.d) * y[H];
    };
    let opts = OdeOptions::with_tol(tol).atol(tol * 1e-2);
    let dense = ode::integrate(rhs, 0.0, &[0.0, 2.0 * a0, 1.0, 0.0, 1.0], t_end, &opts)?;
    if let Some(t) = bad_time {
        return Err(Error::Division(format!("a({t}) = 0")));
    }
    if dense.final_state().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "characteristic solution", t: t_end });
    }
    let first_zero_of_mu0 = find_first_zero(&dense, a0.signum());
    Ok(CharacteristicSolution { dense, a0, domain_end: t_end, first_zero_of_mu0 })
}

fn find_first_zero(dense: &DenseSolution, sign: f64) -> Option<f64> {
    let times = dense.step_points();
    for k in 1..times.len() {
        let m = dense.node(k)[MU0] * sign;
        if m <= 0.0 {
            // the sign change lies in (times[k-1], times[k]]; for k = 1 the
            // left end is the trivial zero at t = 0, so start just inside
            let mut lo = if k == 1 {
                let mut probe = times[1];
                // shrink towards 0 until mu0 is positive again
                while dense.component(probe, MU0) * sign <= 0.0 && probe > 1e-300 {
                    probe *= 0.5;
                }
                probe
            } else {
                times[k - 1]
            };
            let mut hi = times[k];
            if m == 0.0 {
                return Some(hi);
            }
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if dense.component(mid, MU0) * sign > 0.0 {
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

/// Maximum relative deviation of the Wronskian `mu0 mu1' - mu1 mu0'` from
/// `-2 a(0) exp(int_0^t tau)` over `grid`.
pub fn wronskian_residual(chs: &CharacteristicSolution, coeffs: &CoefficientSet, grid: &[f64]) -> Result<f64> {
    let w0 = -2.0 * chs.a0();
    let mut worst = 0.0_f64;
    let mut sorted: Vec<f64> = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let opts = QuadOptions::tight();
    let mut prev_t = 0.0;
    let mut integral = 0.0;
    for &t in &sorted {
        if !(t > 0.0 && t <= chs.domain_end()) {
            return Err(Error::Domain { t, lo: 0.0, hi: chs.domain_end() });
        }
        integral += quad::integrate(|s| coeffs.at(s).tau(), prev_t, t, &opts)?.value;
        prev_t = t;
        let s = chs.state(t);
        let w = s.mu0 * s.dmu1 - s.mu1 * s.dmu0;
        let expected = w0 * integral.exp();
        worst = worst.max((w - expected).abs() / expected.abs());
    }
    Ok(worst)
}
