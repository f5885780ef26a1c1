//! The invariant suite behind `rheat validate`: every check runs a pipeline
//! against an independent reference and reports the measured error.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::burgers::{
    burgers_residual, cole_hopf, linearization_defect, solve_burgers_ivp, traveling_wave, BatemanKind, BatemanWave,
    BurgersOptions, BurgersProblem, TravelingWaveSpec,
};
use crate::coefficients::{
    expand_profile, CoefficientProfile, CoefficientSet, Polynomial, PolynomialCoefficients, ProfileKind,
};
use crate::error::Result;
use crate::grid::{uniform, GridField};
use crate::kernel::{
    expectation, normalization, solve_ivp, AsymptoticKernel, ClosedForm, HeatKernel, InitialData, KernelFn, Variable,
};
use crate::oracle::{fd_burgers, fd_diffusion, richardson_ratio, FdSpec};
use crate::quad::{self, QuadOptions};
use crate::riccati::{integrate_direct, invert, rel_err, superpose, FundamentalRiccati, RiccatiValues};

const SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    Between(f64, f64),
}

impl Bound {
    fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(b) => v <= b,
            Bound::Between(lo, hi) => (lo..=hi).contains(&v),
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::AtMost(b) => write!(f, "<= {b:.0e}"),
            Bound::Between(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub bound: Bound,
    pub pass: bool,
    /// Profiles covered, or the error that stopped the check.
    pub detail: String,
}

type CheckFn = fn(&[ProfileKind]) -> Result<(f64, String)>;

struct Check {
    id: &'static str,
    name: &'static str,
    bound: Bound,
    run: CheckFn,
}

fn builtin(kind: ProfileKind, t_end: f64) -> Result<CoefficientSet> {
    expand_profile(&CoefficientProfile::with_defaults(kind, t_end))
}

fn names(kinds: &[ProfileKind]) -> String {
    kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
}

/// Selected profiles plus an OU variant with a nonzero constant drift,
/// which exercises the linear terms.
fn with_drift_variant(kinds: &[ProfileKind], t_end: f64) -> Result<Vec<(String, CoefficientSet)>> {
    let mut out = Vec::new();
    for &k in kinds {
        out.push((k.name().to_string(), builtin(k, t_end)?));
        if k == ProfileKind::OuDrift {
            let p = CoefficientProfile::with_defaults(k, t_end).param("g", 0.5);
            out.push(("ou-drift(g=0.5)".into(), expand_profile(&p)?));
        }
    }
    Ok(out)
}

/// Non-autonomous test profile with every coefficient active.
pub fn custom_profile(t_end: f64) -> CoefficientSet {
    let poly = PolynomialCoefficients {
        a: Polynomial(vec![1.0, 0.5, 0.1]),
        b: Polynomial(vec![0.05]),
        c: Polynomial(vec![0.2, -0.1]),
        d: Polynomial(vec![0.3, 0.2]),
        f: Polynomial(vec![0.2]),
        g: Polynomial(vec![0.4, 0.1]),
    };
    CoefficientSet::from_polynomials(&poly, t_end)
}

/// Random initial data for the Riccati-type system, kept away from the
/// singular set of the superposition formulas.
pub fn random_init(rng: &mut ChaCha8Rng) -> RiccatiValues {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    RiccatiValues {
        mu: rng.gen_range(0.5..2.0),
        alpha: rng.gen_range(-1.0..-0.1),
        beta: sign * rng.gen_range(0.5..1.5),
        gamma: rng.gen_range(-1.0..1.0),
        delta: rng.gen_range(-1.0..1.0),
        eps: rng.gen_range(-1.0..1.0),
        kappa: rng.gen_range(-1.0..1.0),
    }
}

fn kernel_closed_form(kinds: &[ProfileKind]) -> Result<(f64, String)> {
    let grid = uniform(-3.0, 3.0, 13);
    let mut worst = 0.0_f64;
    for &kind in kinds {
        let profile = CoefficientProfile::with_defaults(kind, 2.0);
        let kernel = HeatKernel::new(&expand_profile(&profile)?, 1e-12)?;
        let exact = ClosedForm::from_profile(&profile)?;
        for t in [0.1, 0.5, 1.0, 2.0] {
            let slice = kernel.slice(t)?;
            for &x in &grid {
                for &y in &grid {
                    worst = worst.max(rel_err(slice.value(x, y)?, exact.eval(x, y, t)?));
                }
            }
        }
    }
    Ok((worst, names(kinds)))
}

fn superposition_vs_direct(kinds: &[ProfileKind]) -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0_f64;
    let profiles = with_drift_variant(kinds, 1.0)?;
    for (_, c) in &profiles {
        let fund = FundamentalRiccati::build(c, 1e-12)?;
        for _ in 0..20 {
            let init = random_init(&mut rng);
            let direct = integrate_direct(c, &init, 1.0, 1e-12)?;
            for t in [0.25, 0.5, 1.0] {
                let s = superpose(&fund, &init, t)?.values.to_array();
                let d = direct.at(t)?.values.to_array();
                for (x, y) in s.iter().zip(d) {
                    worst = worst.max(rel_err(*x, y));
                }
            }
        }
    }
    Ok((worst, format!("{} x 20 initial conditions", profiles.len())))
}

fn inversion_roundtrip(kinds: &[ProfileKind]) -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut worst = 0.0_f64;
    let profiles = with_drift_variant(kinds, 1.0)?;
    for (_, c) in &profiles {
        let fund = FundamentalRiccati::build(c, 1e-12)?;
        for _ in 0..20 {
            let init = random_init(&mut rng);
            for t in [0.25, 0.5, 1.0] {
                let back = invert(&superpose(&fund, &init, t)?)?.to_array();
                for (x, y) in back.iter().zip(fund.at(t)?.to_array()) {
                    worst = worst.max(rel_err(*x, y));
                }
            }
        }
    }
    Ok((worst, format!("{} profiles", profiles.len())))
}

/// Linear extrapolation to `t = 0` of `f` sampled at `t1` and `t2`.
fn extrapolate(t1: f64, f1: f64, t2: f64, f2: f64) -> f64 {
    (t1 * f2 - t2 * f1) / (t1 - t2)
}

fn asymptotic_limits(kinds: &[ProfileKind]) -> Result<(f64, String)> {
    let (t1, t2) = (1e-3, 1e-4);
    let mut worst = 0.0_f64;
    let profiles = with_drift_variant(kinds, 1.0)?;
    for (_, c) in &profiles {
        let fund = FundamentalRiccati::build(c, 1e-12)?;
        let (k1, k2) = (fund.at(t1)?, fund.at(t2)?);
        let v = c.at(0.0);
        let lim = |f: fn(&crate::riccati::KernelCoefficients) -> f64, scaled: bool| {
            let (s1, s2) = if scaled { (t1, t2) } else { (1.0, 1.0) };
            extrapolate(t1, s1 * f(&k1), t2, s2 * f(&k2))
        };
        let pairs = [
            (lim(|k| k.alpha0, true), -1.0 / (4.0 * v.a)),
            (lim(|k| k.beta0, true), 1.0 / (2.0 * v.a)),
            (lim(|k| k.gamma0, true), -1.0 / (4.0 * v.a)),
            (lim(|k| k.delta0, false), v.g / (2.0 * v.a)),
            (lim(|k| k.eps0, false), -v.g / (2.0 * v.a)),
        ];
        for (got, want) in pairs {
            worst = worst.max(rel_err(got, want));
        }
    }
    Ok((worst, format!("{} profiles", profiles.len())))
}

fn asymptotic_kernel_ratio(kinds: &[ProfileKind]) -> Result<(f64, String)> {
    let t = 1e-3;
    let pts = uniform(-1.0, 1.0, 21);
    let mut worst = 0.0_f64;
    for (_, c) in with_drift_variant(kinds, 1.0)? {
        let kernel = HeatKernel::new(&c, 1e-12)?;
        let asym = AsymptoticKernel::new(&c);
        for &x in &pts {
            for &y in pts.iter().filter(|&&y| (x - y).abs() <= 0.5 + 1e-12) {
                let ratio = (kernel.log_eval(x, y, t)? - asym.log_eval(x, y, t)?).exp();
                worst = worst.max((ratio - 1.0).abs());
            }
        }
    }
    Ok((worst, names(kinds)))
}

fn ou_kernel() -> Result<HeatKernel> {
    HeatKernel::new(&builtin(ProfileKind::OuDrift, 1.0)?, 1e-12)
}

fn tight() -> QuadOptions {
    QuadOptions::default().tolerances(1e-15, 1e-13)
}

fn ou_normalization(_: &[ProfileKind]) -> Result<(f64, String)> {
    let v = normalization(&ou_kernel()?, 0.7, Variable::Y, 20.0)?;
    Ok(((v - 1.0).abs(), "ou-drift, y, t=0.7".into()))
}

fn ou_mean(_: &[ProfileKind]) -> Result<(f64, String)> {
    let e = expectation(&ou_kernel()?, &InitialData::function(|y| y), 1.0, 0.5, &tight())?;
    Ok((rel_err(e.value, (-0.5f64).exp()), "ou-drift, x=1, t=0.5".into()))
}

fn fp_long_time(_: &[ProfileKind]) -> Result<(f64, String)> {
    let kernel = HeatKernel::new(&builtin(ProfileKind::FokkerPlanck, 10.0)?, 1e-12)?;
    let mut worst = 0.0_f64;
    for x in uniform(-4.0, 4.0, 33) {
        let lim = (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        worst = worst.max((kernel.eval(x, 0.0, 10.0)? - lim).abs());
    }
    Ok((worst, "fokker-planck, y=0, t=10".into()))
}

fn fp_normalization(_: &[ProfileKind]) -> Result<(f64, String)> {
    let kernel = HeatKernel::new(&builtin(ProfileKind::FokkerPlanck, 1.0)?, 1e-12)?;
    let v = normalization(&kernel, 0.5, Variable::X, 20.0)?;
    Ok(((v - 1.0).abs(), "fokker-planck, x, t=0.5".into()))
}

/// `max rel |int K(x,z,t) K(z,y,s) dz - K(x,y,t+s)|` over a few points.
pub fn chapman_kolmogorov(kernel: &dyn KernelFn, t: f64, s: f64) -> Result<f64> {
    let opts = QuadOptions::default().tolerances(1e-16, 1e-13).pieces(48);
    let pts = [-1.0, 0.0, 0.7];
    let mut worst = 0.0_f64;
    for &x in &pts {
        for &y in &pts {
            let mut failure = None;
            let r = quad::integrate(
                |z| match (kernel.eval(x, z, t), kernel.eval(z, y, s)) {
                    (Ok(a), Ok(b)) => a * b,
                    (Err(e), _) | (_, Err(e)) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                -12.0,
                12.0,
                &opts,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            worst = worst.max(rel_err(r.value, kernel.eval(x, y, t + s)?));
        }
    }
    Ok(worst)
}

fn chapman_kolmogorov_check(kinds: &[ProfileKind]) -> Result<(f64, String)> {
    let mut worst = 0.0_f64;
    for &k in kinds {
        let kernel = HeatKernel::new(&builtin(k, 1.0)?, 1e-12)?;
        worst = worst.max(chapman_kolmogorov(&kernel, 0.3, 0.3)?);
    }
    Ok((worst, names(kinds)))
}

fn cauchy_vs_fd(kinds: &[ProfileKind]) -> Result<(f64, String)> {
    let spec = FdSpec::new(10.0, 801, 1e-4)?;
    let phi = InitialData::gaussian();
    let xs = spec.xs();
    let mut worst = 0.0_f64;
    for &k in kinds {
        let c = builtin(k, 1.0)?;
        let fd = fd_diffusion(&c, &phi, &spec, 0.5)?;
        let u = solve_ivp(&HeatKernel::new(&c, 1e-12)?, &phi, &xs, 0.5, &QuadOptions::default())?;
        let gap = u.field.last_row().iter().zip(fd.last_row()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(gap);
    }
    Ok((worst, names(kinds)))
}

fn fd_richardson(kinds: &[ProfileKind]) -> Result<(f64, String)> {
    let spec = FdSpec::new(8.0, 81, 0.02)?;
    let phi = InitialData::gaussian();
    let mut ratios = Vec::new();
    for &k in kinds {
        let c = builtin(k, 1.0)?;
        ratios.push(richardson_ratio(|s| fd_diffusion(&c, &phi, s, 0.5), &spec)?);
    }
    // report the ratio farthest from 4
    let r = ratios.iter().copied().fold(4.0, |m, r| if (r - 4.0).abs() > (m - 4.0_f64).abs() { r } else { m });
    Ok((r, names(kinds)))
}

fn bateman_ivp(_: &[ProfileKind]) -> Result<(f64, String)> {
    let wave = BatemanWave::new(1.0, 0.3, 1.0, 0.0, BatemanKind::Kink)?;
    let prob = BurgersProblem::viscous(1.0, wave.initial_data(), 1.0)?;
    let xs = uniform(-3.0, 3.0, 61);
    let v = solve_burgers_ivp(&prob, &xs, 0.5, &BurgersOptions::default())?;
    let exact: Vec<f64> = xs.iter().map(|&x| wave.eval(x, 0.5)).collect::<Result<_>>()?;
    let norm = exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let err = v.last_row().iter().zip(&exact).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((err / norm, "kink A=1 V=0.3 a=1, t=0.5, relative to max|v|".into()))
}

fn burgers_vs_fd(_: &[ProfileKind]) -> Result<(f64, String)> {
    let eps = 0.5;
    let v0 = InitialData::function(move |x| eps * 2.0 * x / (1.0 + x * x));
    let prob = BurgersProblem::viscous(1.0, v0, 1.0)?;
    let spec = FdSpec::new(20.0, 801, 1e-4)?;
    let fd = fd_burgers(&prob, &spec, 0.2)?;
    let (lo, hi) = (200, 600); // |x| <= 10
    let xs = fd.xs[lo..=hi].to_vec();
    let v = solve_burgers_ivp(&prob, &xs, 0.2, &BurgersOptions::default())?;
    let err = v.last_row().iter().zip(&fd.last_row()[lo..=hi]).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((err, "v0 = x/(1+x^2), a=1, t=0.2".into()))
}

/// Smooth positive field `exp(sum_k A_k sin(w_k x + s_k t + p_k))` with random modes.
pub fn random_smooth_field(rng: &mut ChaCha8Rng, xs: &[f64], ts: &[f64]) -> GridField {
    let modes: Vec<[f64; 4]> = (0..4)
        .map(|_| {
            [
                rng.gen_range(0.1..0.5),
                rng.gen_range(0.3..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            ]
        })
        .collect();
    GridField::from_fn(xs, ts, |x, t| modes.iter().map(|m| m[0] * (m[1] * x + m[2] * t + m[3]).sin()).sum::<f64>().exp())
}

/// Largest gap between the Burgers residual of `cole_hopf(u)` and
/// `-2 d/dx [(u_t - Q u) / u]`, on points where both sides use central
/// stencils only (the one-sided edge stencils would be differenced twice).
pub fn linearization_gap(u: &GridField, coeffs: &CoefficientSet) -> Result<f64> {
    let r = burgers_residual(&cole_hopf(u)?, coeffs)?.field;
    let d = linearization_defect(u, coeffs)?;
    if r.xs.len() != d.xs.len() || r.ts != d.ts {
        return Err(crate::Error::Invalid("residual and defect live on different grids".into()));
    }
    let n = r.xs.len();
    let mut worst = 0.0_f64;
    for (a, b) in r.values.iter().zip(&d.values) {
        for i in 2..n.saturating_sub(2) {
            worst = worst.max((a[i] - b[i]).abs());
        }
    }
    Ok(worst)
}

fn lemma_identity(_: &[ProfileKind]) -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let c = custom_profile(1.5);
    let xs = uniform(-2.0, 2.0, 401);
    let ts: Vec<f64> = (0..5).map(|j| 0.5 + 1e-3 * j as f64).collect();
    let mut worst = 0.0_f64;
    for _ in 0..8 {
        worst = worst.max(linearization_gap(&random_smooth_field(&mut rng, &xs, &ts), &c)?);
    }
    Ok((worst, "8 random fields, custom coefficients".into()))
}

fn wave_example() -> (TravelingWaveSpec, CoefficientSet) {
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
    coeffs.a = crate::coefficients::Coefficient::new(|t| 1.0 + 0.2 * t);
    coeffs.da = crate::coefficients::Coefficient::constant(0.2);
    coeffs.c = crate::coefficients::Coefficient::new(|t| 0.1 - 0.1 * t);
    (spec, coeffs)
}

fn traveling_wave_residual(_: &[ProfileKind]) -> Result<(f64, String)> {
    let (spec, coeffs) = wave_example();
    let w = traveling_wave(&spec, &coeffs, 1e-13)?;
    let xs = uniform(-1.0, 1.0, 201);
    let ts = [0.5 - 1e-4, 0.5, 0.5 + 1e-4];
    let field = GridField::from_fn(&xs, &ts, |x, t| w.eval(x, t).unwrap_or(f64::NAN));
    let r = burgers_residual(&field, w.induced_coefficients())?;
    Ok((r.max_abs / r.scale, "residual / scale, t=0.5".into()))
}

fn separable_wave(_: &[ProfileKind]) -> Result<(f64, String)> {
    let spec = TravelingWaveSpec {
        c0: 0.5,
        c1: -0.5,
        c2: 0.0,
        c3: 0.0,
        c4: 0.0,
        beta_init: 1.0,
        gamma_init: 0.0,
        z_start: -1.0,
        z_end: 2.5,
        f_start: 0.5,
    };
    let coeffs = CoefficientSet::constant(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let w = traveling_wave(&spec, &coeffs, 1e-12)?;
    let z0 = spec.z_start + 2.0 / spec.f_start;
    let mut worst = 0.0_f64;
    for z in uniform(spec.z_start, spec.z_end, 36) {
        worst = worst.max((w.profile(z)? + 2.0 / (z - z0)).abs());
    }
    Ok((worst, "F = -2/(z - z0)".into()))
}

fn gamma0_dual(_: &[ProfileKind]) -> Result<(f64, String)> {
    let c = custom_profile(1.5);
    let fund = FundamentalRiccati::build(&c, 1e-12)?;
    let mut worst = 0.0_f64;
    // mu0' vanishes near t = 1.48 for this profile
    for t in uniform(0.1, 1.4, 14) {
        worst = worst.max(rel_err(fund.gamma0_by_quadrature(t)?, fund.at(t)?.gamma0));
    }
    Ok((worst, "custom profile".into()))
}

fn sigma_forms(_: &[ProfileKind]) -> Result<(f64, String)> {
    let c = custom_profile(1.5);
    let mut worst = 0.0_f64;
    for t in uniform(0.0, 1.5, 31) {
        worst = worst.max(rel_err(c.sigma_printed(t)?, c.tau_sigma(t)?.1));
    }
    Ok((worst, "custom profile, d != 0".into()))
}

fn checks() -> Vec<Check> {
    use Bound::*;
    let c = |id, name, bound, run: CheckFn| Check { id, name, bound, run };
    vec![
        c("1", "kernel vs closed form", AtMost(1e-8), kernel_closed_form),
        c("2", "superposition vs direct ODE", AtMost(1e-6), superposition_vs_direct),
        c("3", "inversion roundtrip", AtMost(1e-9), inversion_roundtrip),
        c("4a", "small-time limits", AtMost(1e-4), asymptotic_limits),
        c("4b", "asymptotic kernel ratio", AtMost(1e-2), asymptotic_kernel_ratio),
        c("5a", "OU normalization in y", AtMost(1e-8), ou_normalization),
        c("5b", "OU mean", AtMost(1e-6), ou_mean),
        c("5c", "FP long-time limit", AtMost(1e-8), fp_long_time),
        c("5d", "FP normalization in x", AtMost(1e-8), fp_normalization),
        c("6", "Chapman-Kolmogorov", AtMost(1e-6), chapman_kolmogorov_check),
        c("7a", "Cauchy solver vs FD", AtMost(1e-3), cauchy_vs_fd),
        c("7b", "FD Richardson ratio", Between(3.0, 5.0), fd_richardson),
        c("8a", "Burgers IVP vs Bateman kink", AtMost(1e-4), bateman_ivp),
        c("8b", "Burgers IVP vs FD", AtMost(1e-3), burgers_vs_fd),
        c("8c", "linearization identity", AtMost(1e-4), lemma_identity),
        c("9a", "traveling-wave residual", AtMost(1e-6), traveling_wave_residual),
        c("9b", "separable traveling wave", AtMost(1e-10), separable_wave),
        c("10a", "gamma0 dual forms", AtMost(1e-6), gamma0_dual),
        c("10b", "sigma regularized vs printed", AtMost(1e-12), sigma_forms),
    ]
}

/// Runs every check; profile-dependent checks use `profiles`. Checks run
/// concurrently but are reported in a fixed order.
pub fn run_suite(profiles: &[ProfileKind]) -> Vec<CheckOutcome> {
    let profiles: Arc<[ProfileKind]> = profiles.iter().copied().filter(|k| *k != ProfileKind::Custom).collect();
    checks()
        .into_par_iter()
        .map(|check| {
            let (measured, detail, pass) = match (check.run)(&profiles) {
                Ok((m, d)) => (m, d, check.bound.holds(m)),
                Err(e) => (f64::NAN, format!("error: {e}"), false),
            };
            CheckOutcome { id: check.id, name: check.name, measured, bound: check.bound, pass, detail }
        })
        .collect()
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.pass)
}

/// Plain-text table, one row per check.
pub fn format_table(outcomes: &[CheckOutcome]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<5} {:<30} {:>12} {:>14}  {:<4}  detail", "id", "check", "measured", "bound", "");
    for o in outcomes {
        let _ = writeln!(
            s,
            "{:<5} {:<30} {:>12.3e} {:>14}  {:<4}  {}",
            o.id,
            o.name,
            o.measured,
            o.bound.to_string(),
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let _ = writeln!(s, "{passed}/{} checks passed", outcomes.len());
    s
}
