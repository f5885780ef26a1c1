//! The Riccati-type system for the kernel coefficients
//!
//! ```text
//! mu'    = -2 mu (2 a alpha + d)
//! alpha' = -b + 2 c alpha + 4 a alpha^2
//! beta'  = (c + 4 a alpha) beta
//! gamma' = a beta^2
//! delta' = (c + 4 a alpha) delta + f - 2 alpha g
//! eps'   = (2 a delta - g) beta
//! kappa' = a delta^2 - g delta
//! ```
//!
//! [`FundamentalRiccati`] is the particular solution singular at `t = 0` that
//! builds the heat kernel; [`superpose`] expresses every other solution
//! through it and [`invert`] recovers it from any regular solution.

use std::sync::Arc;

use crate::characteristic::{solve_characteristic, CharacteristicSolution};
use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::ode::{self, DenseSolution, OdeOptions};
use crate::quad::{self, QuadOptions};

/// Magnitude at which direct integration reports a blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;
/// Floor used in componentwise relative comparisons.
pub const REL_FLOOR: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-14;
// geometric grading of the first step towards the t = 0 singularity
const GRADING_LEVELS: usize = 40;

/// The fundamental coefficients `mu0, alpha0, ..., kappa0` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCoefficients {
    pub mu0: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub gamma0: f64,
    pub delta0: f64,
    pub eps0: f64,
    pub kappa0: f64,
}

impl KernelCoefficients {
    pub const NAMES: [&'static str; 7] = ["mu0", "alpha0", "beta0", "gamma0", "delta0", "eps0", "kappa0"];

    pub fn to_array(&self) -> [f64; 7] {
        [self.mu0, self.alpha0, self.beta0, self.gamma0, self.delta0, self.eps0, self.kappa0]
    }
}

/// Seven values `(mu, alpha, beta, gamma, delta, eps, kappa)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RiccatiValues {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eps: f64,
    pub kappa: f64,
}

impl RiccatiValues {
    pub const NAMES: [&'static str; 7] = ["mu", "alpha", "beta", "gamma", "delta", "eps", "kappa"];

    pub fn from_array(v: [f64; 7]) -> Self {
        Self { mu: v[0], alpha: v[1], beta: v[2], gamma: v[3], delta: v[4], eps: v[5], kappa: v[6] }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.mu, self.alpha, self.beta, self.gamma, self.delta, self.eps, self.kappa]
    }
}

/// A solution of the system at time `t`, with the initial data it started from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiState {
    pub t: f64,
    pub values: RiccatiValues,
    pub init: RiccatiValues,
}

/// Anything that yields solutions of the system along a time interval.
pub trait RiccatiPath: Sync {
    fn state_at(&self, t: f64) -> Result<RiccatiState>;
    fn init(&self) -> RiccatiValues;
}

/// Running integrals over a fixed partition; the tail piece is integrated on demand.
#[derive(Debug, Clone)]
struct Cumulative {
    breaks: Vec<f64>,
    totals: Vec<f64>,
}

impl Cumulative {
    fn build<F: Fn(f64) -> f64>(breaks: &[f64], f: F) -> Self {
        let mut totals = Vec::with_capacity(breaks.len());
        totals.push(0.0);
        let mut acc = 0.0;
        for k in 1..breaks.len() {
            acc += if k == 1 {
                graded_integral(&f, breaks[0], breaks[1])
            } else {
                quad::gk21(&f, breaks[k - 1], breaks[k]).0
            };
            totals.push(acc);
        }
        Self { breaks: breaks.to_vec(), totals }
    }

    fn eval<F: Fn(f64) -> f64>(&self, t: f64, f: F) -> f64 {
        let k = self.breaks.partition_point(|&s| s <= t).saturating_sub(1);
        let lo = self.breaks[k];
        if t == lo {
            return self.totals[k];
        }
        let tail = if k == 0 { graded_integral(&f, lo, t) } else { quad::gk21(&f, lo, t).0 };
        self.totals[k] + tail
    }
}

/// Integral over `[0, b]` on pieces `[b 2^-(j+1), b 2^-j]`, resolving the left end.
fn graded_integral<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let len = b - a;
    let mut acc = 0.0;
    let mut hi = len;
    for _ in 0..GRADING_LEVELS {
        let lo = 0.5 * hi;
        acc += quad::gk21(f, a + lo, a + hi).0;
        hi = lo;
    }
    acc + quad::gk21(f, a, a + hi).0
}

/// The particular solution singular at `t = 0`, built from the standard
/// solutions `mu0`, `mu1` of the characteristic equation.
///
/// `alpha0`, `beta0`, `gamma0` are closed-form in `mu0`, `mu0'`, `mu1`, `h`;
/// `delta0` comes from its quadrature, `eps0` and `kappa0` from quadrature of
/// their right-hand sides along the dense characteristic solution.
#[derive(Debug, Clone)]
pub struct FundamentalRiccati {
    chs: Arc<CharacteristicSolution>,
    coeffs: CoefficientSet,
    valid_end: f64,
    /// Whether `valid_end` is a zero of `mu0` (excluded from the domain).
    open_end: bool,
    a0: f64,
    d0: f64,
    g0: f64,
    delta_int: Cumulative,
    eps_int: Cumulative,
    kappa_int: Cumulative,
}

/// Builds the fundamental solution from a characteristic solution.
pub fn fundamental(chs: Arc<CharacteristicSolution>, coeffs: &CoefficientSet, tol: f64) -> Result<FundamentalRiccati> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tol = {tol} must be positive")));
    }
    let v0 = coeffs.at(0.0);
    let (open_end, valid_end) = match chs.first_zero_of_mu0() {
        Some(z) => (true, z),
        None => (false, chs.domain_end()),
    };
    let breaks: Vec<f64> = chs
        .step_points()
        .iter()
        .copied()
        .filter(|&s| s < valid_end || (!open_end && s <= valid_end))
        .collect();
    let empty = Cumulative { breaks: vec![0.0], totals: vec![0.0] };
    let mut fund = FundamentalRiccati {
        chs,
        coeffs: coeffs.clone(),
        valid_end,
        open_end,
        a0: v0.a,
        d0: v0.d,
        g0: v0.g,
        delta_int: empty.clone(),
        eps_int: empty.clone(),
        kappa_int: empty,
    };
    fund.delta_int = Cumulative::build(&breaks, |s| fund.delta_integrand(s));
    fund.eps_int = Cumulative::build(&breaks, |s| fund.eps_rate(s));
    fund.kappa_int = Cumulative::build(&breaks, |s| fund.kappa_rate(s));
    Ok(fund)
}

impl FundamentalRiccati {
    /// Solves the characteristic equation on `[0, coeffs.domain_end]` and builds the fundamental solution.
    pub fn build(coeffs: &CoefficientSet, tol: f64) -> Result<Self> {
        let chs = solve_characteristic(coeffs, coeffs.domain_end, tol)?;
        fundamental(Arc::new(chs), coeffs, tol)
    }

    pub fn characteristic(&self) -> &CharacteristicSolution {
        &self.chs
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn valid_end(&self) -> f64 {
        self.valid_end
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let inside = t > 0.0 && if self.open_end { t < self.valid_end } else { t <= self.valid_end };
        if !inside {
            return Err(Error::Domain { t, lo: 0.0, hi: self.valid_end });
        }
        Ok(())
    }

    // integrand of the delta0 quadrature; regular at s = 0
    fn delta_integrand(&self, s: f64) -> f64 {
        let v = self.coeffs.at(s);
        let c = self.chs.state(s);
        ((v.f + v.d * v.g / v.a) * c.mu0 + v.g * c.dmu0 / (2.0 * v.a)) / c.h
    }

    fn delta_integral(&self, s: f64) -> f64 {
        self.delta_int.eval(s, |r| self.delta_integrand(r))
    }

    fn delta0_at(&self, s: f64) -> f64 {
        if s == 0.0 {
            return self.g0 / (2.0 * self.a0);
        }
        let c = self.chs.state(s);
        c.h * self.delta_integral(s) / c.mu0
    }

    // eps0' = -(g - 2 a delta0) beta0, written as -h (g mu0 - 2 a h I) / mu0^2
    fn eps_rate(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let v = self.coeffs.at(s);
        let c = self.chs.state(s);
        let numer = v.g * c.mu0 - 2.0 * v.a * c.h * self.delta_integral(s);
        -c.h * numer / (c.mu0 * c.mu0)
    }

    fn kappa_rate(&self, s: f64) -> f64 {
        let v = self.coeffs.at(s);
        let delta = self.delta0_at(s);
        v.a * delta * delta - v.g * delta
    }

    /// All seven fundamental coefficients at `t` in the validity interval.
    pub fn at(&self, t: f64) -> Result<KernelCoefficients> {
        self.check_time(t)?;
        let v = self.coeffs.at(t);
        let c = self.chs.state(t);
        let alpha0 = -c.dmu0 / (4.0 * v.a * c.mu0) - v.d / (2.0 * v.a);
        let beta0 = c.h / c.mu0;
        let gamma0 = self.d0 / (2.0 * self.a0) - c.mu1 / (2.0 * self.chs.mu1_at_0() * c.mu0);
        let delta0 = c.h * self.delta_integral(t) / c.mu0;
        let eps0 = -self.g0 / (2.0 * self.a0) + self.eps_int.eval(t, |s| self.eps_rate(s));
        let kappa0 = self.kappa_int.eval(t, |s| self.kappa_rate(s));
        let out = KernelCoefficients { mu0: c.mu0, alpha0, beta0, gamma0, delta0, eps0, kappa0 };
        if out.to_array().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "fundamental coefficients", t });
        }
        Ok(out)
    }

    /// `gamma0` through the quadrature form
    /// `d(0)/(2a(0)) - a h^2/(mu0 mu0') - 4 int_0^t a sigma h^2 / mu0'^2 ds`.
    ///
    /// Fails if `mu0'` vanishes on `[0, t]`.
    pub fn gamma0_by_quadrature(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        self.check_dmu0_nonzero(t)?;
        let integrand = |s: f64| {
            let v = self.coeffs.at(s);
            let c = self.chs.state(s);
            v.a * v.sigma() * c.h * c.h / (c.dmu0 * c.dmu0)
        };
        let integral = self.integrate_on_steps(integrand, t)?;
        let v = self.coeffs.at(t);
        let c = self.chs.state(t);
        Ok(self.d0 / (2.0 * self.a0) - v.a * c.h * c.h / (c.mu0 * c.dmu0) - 4.0 * integral)
    }

    /// `(eps0, kappa0)` through the integration-by-parts forms whose
    /// integrands carry `1 / mu0'`; fails if `mu0'` vanishes on `[0, t]`.
    pub fn eps0_kappa0_by_parts(&self, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        self.check_dmu0_nonzero(t)?;
        // p = mu0 * delta0 = h * I
        let p = |s: f64| self.chs.h(s) * self.delta_integral(s);
        let eps_integrand = |s: f64| {
            let v = self.coeffs.at(s);
            let c = self.chs.state(s);
            let src = v.f + v.d * v.g / v.a;
            -8.0 * v.a * v.sigma() * c.h * p(s) / (c.dmu0 * c.dmu0) + 2.0 * v.a * c.h * src / c.dmu0
        };
        let kappa_integrand = |s: f64| {
            let v = self.coeffs.at(s);
            let c = self.chs.state(s);
            let src = v.f + v.d * v.g / v.a;
            let ps = p(s);
            -4.0 * v.a * v.sigma() * ps * ps / (c.dmu0 * c.dmu0) + 2.0 * v.a * ps * src / c.dmu0
        };
        let v = self.coeffs.at(t);
        let c = self.chs.state(t);
        let delta0 = self.delta0_at(t);
        let eps0 = -2.0 * v.a * c.h * delta0 / c.dmu0 + self.integrate_on_steps(eps_integrand, t)?;
        let kappa0 = -v.a * c.mu0 * delta0 * delta0 / c.dmu0 + self.integrate_on_steps(kappa_integrand, t)?;
        Ok((eps0, kappa0))
    }

    fn check_dmu0_nonzero(&self, t: f64) -> Result<()> {
        let sign = self.chs.dmu0(0.0).signum();
        let steps = self.chs.step_points();
        let n = 64;
        let probes = steps
            .iter()
            .copied()
            .filter(|&s| s <= t)
            .chain((0..=n).map(|i| t * i as f64 / n as f64));
        for s in probes {
            if self.chs.dmu0(s) * sign <= 0.0 {
                return Err(Error::Division(format!("mu0'({s}) changes sign on [0, {t}]")));
            }
        }
        Ok(())
    }

    fn integrate_on_steps<F: Fn(f64) -> f64>(&self, f: F, t: f64) -> Result<f64> {
        let opts = QuadOptions::tight();
        let mut acc = 0.0;
        let mut lo = 0.0;
        for &s in self.chs.step_points().iter().skip(1) {
            let hi = s.min(t);
            acc += quad::integrate(&f, lo, hi, &opts)?.value;
            lo = hi;
            if hi >= t {
                break;
            }
        }
        Ok(acc)
    }
}

/// General solution of the system for arbitrary initial data, through the
/// fundamental solution.
pub fn superpose(fund: &FundamentalRiccati, init: &RiccatiValues, t: f64) -> Result<RiccatiState> {
    let k = fund.at(t)?;
    let s = init.alpha + k.gamma0;
    if s.abs() <= SINGULAR_TOL {
        return Err(Error::SingularSuperposition { t, value: s });
    }
    let shift = init.delta + k.eps0;
    let values = RiccatiValues {
        mu: -2.0 * init.mu * k.mu0 * s,
        alpha: k.alpha0 - k.beta0 * k.beta0 / (4.0 * s),
        beta: -init.beta * k.beta0 / (2.0 * s),
        gamma: init.gamma - init.beta * init.beta / (4.0 * s),
        delta: k.delta0 - k.beta0 * shift / (2.0 * s),
        eps: init.eps - init.beta * shift / (2.0 * s),
        kappa: init.kappa + k.kappa0 - shift * shift / (4.0 * s),
    };
    Ok(RiccatiState { t, values, init: *init })
}

/// [`superpose`] packaged as a path.
#[derive(Debug, Clone)]
pub struct SuperposedPath<'a> {
    pub fund: &'a FundamentalRiccati,
    pub init: RiccatiValues,
}

impl RiccatiPath for SuperposedPath<'_> {
    fn state_at(&self, t: f64) -> Result<RiccatiState> {
        if t == 0.0 {
            return Ok(RiccatiState { t, values: self.init, init: self.init });
        }
        superpose(self.fund, &self.init, t)
    }

    fn init(&self) -> RiccatiValues {
        self.init
    }
}

/// Recovers the fundamental coefficients from a regular solution.
pub fn invert(state: &RiccatiState) -> Result<KernelCoefficients> {
    let RiccatiState { t, values: v, init } = *state;
    if init.beta == 0.0 {
        return Err(Error::Parameter("beta(0) must be nonzero".into()));
    }
    if init.mu == 0.0 {
        return Err(Error::Parameter("mu(0) must be nonzero".into()));
    }
    let dg = v.gamma - init.gamma;
    if dg.abs() <= SINGULAR_TOL * v.gamma.abs().max(1.0) {
        return Err(Error::SingularInversion { t, value: dg });
    }
    let de = v.eps - init.eps;
    Ok(KernelCoefficients {
        mu0: 2.0 * v.mu * dg / (init.mu * init.beta * init.beta),
        alpha0: v.alpha - v.beta * v.beta / (4.0 * dg),
        beta0: init.beta * v.beta / (2.0 * dg),
        gamma0: -init.alpha - init.beta * init.beta / (4.0 * dg),
        delta0: v.delta - v.beta * de / (2.0 * dg),
        eps0: -init.delta + init.beta * de / (2.0 * dg),
        kappa0: v.kappa - init.kappa - de * de / (4.0 * dg),
    })
}

/// Dense trajectory from direct integration of the seven equations.
#[derive(Debug, Clone)]
pub struct RiccatiTrajectory {
    dense: DenseSolution,
    init: RiccatiValues,
}

impl RiccatiTrajectory {
    pub fn t_end(&self) -> f64 {
        self.dense.t_end()
    }

    pub fn at(&self, t: f64) -> Result<RiccatiState> {
        if !(0.0..=self.dense.t_end()).contains(&t) {
            return Err(Error::Domain { t, lo: 0.0, hi: self.dense.t_end() });
        }
        let mut y = [0.0; 7];
        self.dense.eval_into(t, &mut y);
        Ok(RiccatiState { t, values: RiccatiValues::from_array(y), init: self.init })
    }
}

impl RiccatiPath for RiccatiTrajectory {
    fn state_at(&self, t: f64) -> Result<RiccatiState> {
        self.at(t)
    }

    fn init(&self) -> RiccatiValues {
        self.init
    }
}

/// Integrates the seven equations from `init` on `[0, t_end]`.
///
/// Reports [`Error::BlowUp`] once a component exceeds [`BLOWUP_THRESHOLD`].
pub fn integrate_direct(coeffs: &CoefficientSet, init: &RiccatiValues, t_end: f64, tol: f64) -> Result<RiccatiTrajectory> {
    if init.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "initial data", t: 0.0 });
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tol = {tol} must be positive")));
    }
    coeffs.check_time(t_end)?;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let v = coeffs.at(t);
        let (mu, alpha, beta, delta) = (y[0], y[1], y[2], y[4]);
        let drift = v.c + 4.0 * v.a * alpha;
        dy[0] = -2.0 * mu * (2.0 * v.a * alpha + v.d);
        dy[1] = -v.b + 2.0 * v.c * alpha + 4.0 * v.a * alpha * alpha;
        dy[2] = drift * beta;
        dy[3] = v.a * beta * beta;
        dy[4] = drift * delta + v.f - 2.0 * alpha * v.g;
        dy[5] = (2.0 * v.a * delta - v.g) * beta;
        dy[6] = v.a * delta * delta - v.g * delta;
    };
    let opts = OdeOptions::with_tol(tol).blowup(BLOWUP_THRESHOLD);
    let dense = ode::integrate(rhs, 0.0, &init.to_array(), t_end, &opts)?;
    Ok(RiccatiTrajectory { dense, init: *init })
}

/// Truncated small-`t` expansions of the fundamental coefficients.
///
/// `mu0` is reported as its leading term `2 a(0) t`.
pub fn asymptotics(coeffs: &CoefficientSet, t: f64) -> KernelCoefficients {
    let v = coeffs.at(0.0);
    let a = v.a;
    let slope = v.da / (8.0 * a * a);
    KernelCoefficients {
        mu0: 2.0 * a * t,
        alpha0: -1.0 / (4.0 * a * t) - v.c / (4.0 * a) + slope,
        beta0: 1.0 / (2.0 * a * t) - v.da / (4.0 * a * a),
        gamma0: -1.0 / (4.0 * a * t) + v.c / (4.0 * a) + slope,
        delta0: v.g / (2.0 * a),
        eps0: -v.g / (2.0 * a),
        kappa0: 0.0,
    }
}

/// `|actual - expected| / max(|expected|, REL_FLOOR)`; absolute when `expected == 0`.
pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        (actual - expected).abs() / expected.abs().max(REL_FLOOR)
    }
}
