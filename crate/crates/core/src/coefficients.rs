//! Time-dependent coefficients of the diffusion-type equation
//!
//! ```text
//! u_t = a(t) u_xx - (g(t) - c(t) x) u_x + (d(t) + f(t) x - b(t) x^2) u
//! ```
//!
//! and the derived coefficients `tau(t)`, `sigma(t)` of the characteristic
//! equation `mu'' - tau mu' - 4 sigma mu = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real function of time.
#[derive(Clone)]
pub struct Coefficient(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl Coefficient {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self(Arc::new(f))
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn polynomial(p: Polynomial) -> Self {
        Self::new(move |t| p.eval(t))
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Coefficient(..)")
    }
}

/// Polynomial in `t` with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }
}

/// Coefficient values at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientValues {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
    pub da: f64,
    pub dd: f64,
}

impl CoefficientValues {
    pub fn tau(&self) -> f64 {
        self.da / self.a + 2.0 * self.c - 4.0 * self.d
    }

    /// `sigma` in the form that stays finite when `d = 0`.
    pub fn sigma(&self) -> f64 {
        self.a * self.b + self.c * self.d - self.d * self.d + self.d * self.da / (2.0 * self.a) - 0.5 * self.dd
    }
}

/// The six coefficient functions plus the derivatives of `a` and `d`.
///
/// Immutable after construction; clones share the underlying functions.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    pub a: Coefficient,
    pub b: Coefficient,
    pub c: Coefficient,
    pub d: Coefficient,
    pub f: Coefficient,
    pub g: Coefficient,
    pub da: Coefficient,
    pub dd: Coefficient,
    pub domain_end: f64,
}

impl CoefficientSet {
    /// Constant coefficients on `[0, domain_end]`.
    pub fn constant(a: f64, b: f64, c: f64, d: f64, f: f64, g: f64, domain_end: f64) -> Self {
        Self {
            a: Coefficient::constant(a),
            b: Coefficient::constant(b),
            c: Coefficient::constant(c),
            d: Coefficient::constant(d),
            f: Coefficient::constant(f),
            g: Coefficient::constant(g),
            da: Coefficient::zero(),
            dd: Coefficient::zero(),
            domain_end,
        }
    }

    /// Polynomial coefficients; derivatives of `a` and `d` are exact.
    pub fn from_polynomials(p: &PolynomialCoefficients, domain_end: f64) -> Self {
        Self {
            a: Coefficient::polynomial(p.a.clone()),
            b: Coefficient::polynomial(p.b.clone()),
            c: Coefficient::polynomial(p.c.clone()),
            d: Coefficient::polynomial(p.d.clone()),
            f: Coefficient::polynomial(p.f.clone()),
            g: Coefficient::polynomial(p.g.clone()),
            da: Coefficient::polynomial(p.a.derivative()),
            dd: Coefficient::polynomial(p.d.derivative()),
            domain_end,
        }
    }

    pub fn with_domain_end(mut self, domain_end: f64) -> Self {
        self.domain_end = domain_end;
        self
    }

    #[inline]
    pub fn at(&self, t: f64) -> CoefficientValues {
        CoefficientValues {
            a: self.a.eval(t),
            b: self.b.eval(t),
            c: self.c.eval(t),
            d: self.d.eval(t),
            f: self.f.eval(t),
            g: self.g.eval(t),
            da: self.da.eval(t),
            dd: self.dd.eval(t),
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.domain_end).contains(&t) {
            return Err(Error::Domain { t, lo: 0.0, hi: self.domain_end });
        }
        Ok(())
    }

    /// `(tau, sigma)` at time `t`.
    pub fn tau_sigma(&self, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        let v = self.at(t);
        if v.a == 0.0 {
            return Err(Error::Division(format!("a({t}) = 0")));
        }
        Ok((v.tau(), v.sigma()))
    }

    /// `sigma` exactly as `ab + cd - d^2 + (d/2)(a'/a - d'/d)`; undefined when `d = 0`.
    pub fn sigma_printed(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let v = self.at(t);
        if v.a == 0.0 {
            return Err(Error::Division(format!("a({t}) = 0")));
        }
        if v.d == 0.0 {
            return Err(Error::Division(format!("d({t}) = 0")));
        }
        Ok(v.a * v.b + v.c * v.d - v.d * v.d + 0.5 * v.d * (v.da / v.a - v.dd / v.d))
    }

    /// True if `b`, `d` and `f` vanish at the sampled times.
    pub fn is_kolmogorov_type(&self, t_end: f64, samples: usize) -> bool {
        let n = samples.max(2);
        (0..n).all(|i| {
            let t = t_end * i as f64 / (n - 1) as f64;
            let v = self.at(t);
            v.b == 0.0 && v.d == 0.0 && v.f == 0.0
        })
    }

    /// Sample-based check for time independence of all coefficients.
    pub fn is_autonomous(&self, samples: usize) -> bool {
        let v0 = self.at(0.0);
        let n = samples.max(2);
        (1..n).all(|i| self.at(self.domain_end * i as f64 / (n - 1) as f64) == v0)
    }
}

/// Polynomial coefficient tables keyed by coefficient name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PolynomialCoefficients {
    pub a: Polynomial,
    pub b: Polynomial,
    pub c: Polynomial,
    pub d: Polynomial,
    pub f: Polynomial,
    pub g: Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    #[serde(alias = "heat")]
    ConstantHeat,
    Cable,
    FokkerPlanck,
    #[serde(alias = "ou")]
    OuDrift,
    Custom,
}

impl ProfileKind {
    pub const BUILTIN: [ProfileKind; 4] = [
        ProfileKind::ConstantHeat,
        ProfileKind::Cable,
        ProfileKind::FokkerPlanck,
        ProfileKind::OuDrift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::ConstantHeat => "constant-heat",
            ProfileKind::Cable => "cable",
            ProfileKind::FokkerPlanck => "fokker-planck",
            ProfileKind::OuDrift => "ou-drift",
            ProfileKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "constant-heat" | "heat" => Ok(ProfileKind::ConstantHeat),
            "cable" => Ok(ProfileKind::Cable),
            "fokker-planck" | "fp" => Ok(ProfileKind::FokkerPlanck),
            "ou-drift" | "ou" => Ok(ProfileKind::OuDrift),
            "custom" => Ok(ProfileKind::Custom),
            other => Err(Error::Parameter(format!("unknown profile '{other}'"))),
        }
    }

    /// Parameter names and their defaults.
    pub fn default_params(self) -> &'static [(&'static str, f64)] {
        match self {
            ProfileKind::ConstantHeat => &[("a", 1.0)],
            ProfileKind::Cable => &[("lambda", 1.0), ("tau", 2.0)],
            ProfileKind::FokkerPlanck => &[],
            ProfileKind::OuDrift => &[("a", 1.0), ("k", 1.0), ("g", 0.0)],
            ProfileKind::Custom => &[],
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named coefficient profile, as read from a JSON config.
///
/// ```json
/// {"profile": "ou-drift", "params": {"a": 1, "k": 2, "g": 0}, "T": 2}
/// {"profile": "custom", "poly": {"a": [1, 0.5]}, "T": 1}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientProfile {
    #[serde(rename = "profile")]
    pub kind: ProfileKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<PolynomialCoefficients>,
    #[serde(rename = "T")]
    pub domain_end: f64,
}

impl CoefficientProfile {
    /// Built-in profile with every parameter at its default.
    pub fn with_defaults(kind: ProfileKind, domain_end: f64) -> Self {
        Self {
            kind,
            params: kind
                .default_params()
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
            poly: None,
            domain_end,
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn custom(poly: PolynomialCoefficients, domain_end: f64) -> Self {
        Self {
            kind: ProfileKind::Custom,
            params: BTreeMap::new(),
            poly: Some(poly),
            domain_end,
        }
    }

    fn get(&self, name: &str) -> Result<f64> {
        let v = *self
            .params
            .get(name)
            .ok_or_else(|| Error::Parameter(format!("profile {} needs parameter '{name}'", self.kind)))?;
        if !v.is_finite() {
            return Err(Error::Parameter(format!("parameter '{name}' = {v} is not finite")));
        }
        Ok(v)
    }
}

/// Expands a profile into the coefficients of the canonical equation.
///
/// Examples written with a `+(g - k x) u_x` drift are mapped onto the
/// `-(g - c x) u_x` convention by flipping signs.
pub fn expand_profile(profile: &CoefficientProfile) -> Result<CoefficientSet> {
    let t_end = profile.domain_end;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Parameter(format!("T = {t_end} must be positive")));
    }
    let set = match profile.kind {
        ProfileKind::ConstantHeat => {
            let a = profile.get("a")?;
            if a == 0.0 {
                return Err(Error::Parameter("a must be nonzero".into()));
            }
            CoefficientSet::constant(a, 0.0, 0.0, 0.0, 0.0, 0.0, t_end)
        }
        ProfileKind::Cable => {
            // tau u_t = lambda^2 u_xx + u
            let lambda = profile.get("lambda")?;
            let tau = profile.get("tau")?;
            if lambda == 0.0 || tau <= 0.0 {
                return Err(Error::Parameter(format!("cable needs lambda != 0 and tau > 0 (got {lambda}, {tau})")));
            }
            CoefficientSet::constant(lambda * lambda / tau, 0.0, 0.0, 1.0 / tau, 0.0, 0.0, t_end)
        }
        ProfileKind::FokkerPlanck => CoefficientSet::constant(1.0, 0.0, 1.0, 1.0, 0.0, 0.0, t_end),
        ProfileKind::OuDrift => {
            // u_t = a u_xx + (g - k x) u_x
            let a = profile.get("a")?;
            let k = profile.get("k")?;
            let g = profile.get("g")?;
            if a == 0.0 {
                return Err(Error::Parameter("a must be nonzero".into()));
            }
            CoefficientSet::constant(a, 0.0, -k, 0.0, 0.0, -g, t_end)
        }
        ProfileKind::Custom => {
            let poly = profile
                .poly
                .as_ref()
                .ok_or_else(|| Error::Parameter("custom profile needs 'poly'".into()))?;
            if poly.a.0.iter().all(|&c| c == 0.0) {
                return Err(Error::Parameter("custom profile needs a nonzero 'a' polynomial".into()));
            }
            let all = [&poly.a, &poly.b, &poly.c, &poly.d, &poly.f, &poly.g];
            if all.iter().any(|p| p.0.iter().any(|c| !c.is_finite())) {
                return Err(Error::Parameter("polynomial coefficients must be finite".into()));
            }
            CoefficientSet::from_polynomials(poly, t_end)
        }
    };
    Ok(set)
}

/// One failed check in a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    NonFinite { name: &'static str, t: f64 },
    ZeroOrSignChange { t: f64 },
    DerivativeMismatch { name: &'static str, max_rel_err: f64, at: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub samples: usize,
    pub issues: Vec<ValidationIssue>,
    pub da_max_rel_err: f64,
    pub dd_max_rel_err: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

const DERIVATIVE_RTOL: f64 = 1e-4;

/// Samples the coefficients on a uniform grid and reports problems.
pub fn validate(coeffs: &CoefficientSet, samples: usize) -> Result<ValidationReport> {
    if samples < 2 {
        return Err(Error::Parameter(format!("need at least 2 samples, got {samples}")));
    }
    let t_end = coeffs.domain_end;
    let ts: Vec<f64> = (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();
    let mut report = ValidationReport { samples, ..Default::default() };

    let a0 = coeffs.a.eval(0.0);
    let mut sign_reported = false;
    for &t in &ts {
        let v = coeffs.at(t);
        let named = [
            ("a", v.a),
            ("b", v.b),
            ("c", v.c),
            ("d", v.d),
            ("f", v.f),
            ("g", v.g),
            ("da", v.da),
            ("dd", v.dd),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                report.issues.push(ValidationIssue::NonFinite { name, t });
            }
        }
        if !sign_reported && (v.a == 0.0 || v.a.signum() != a0.signum()) {
            report.issues.push(ValidationIssue::ZeroOrSignChange { t });
            sign_reported = true;
        }
    }

    let h = 1e-5 * t_end.max(1.0);
    let fd = |c: &Coefficient, t: f64| -> f64 {
        if t - h < 0.0 {
            (-3.0 * c.eval(t) + 4.0 * c.eval(t + h) - c.eval(t + 2.0 * h)) / (2.0 * h)
        } else if t + h > t_end {
            (3.0 * c.eval(t) - 4.0 * c.eval(t - h) + c.eval(t - 2.0 * h)) / (2.0 * h)
        } else {
            (c.eval(t + h) - c.eval(t - h)) / (2.0 * h)
        }
    };
    let check = |value: &Coefficient, deriv: &Coefficient, name: &'static str, report: &mut ValidationReport| -> f64 {
        let scale = ts.iter().map(|&t| value.eval(t).abs()).fold(0.0, f64::max);
        let floor = 1e-6 * (1.0 + scale) / t_end.max(1.0);
        let mut worst = 0.0_f64;
        let mut at = 0.0;
        for &t in &ts {
            let exact = deriv.eval(t);
            let approx = fd(value, t);
            let rel = (exact - approx).abs() / approx.abs().max(exact.abs()).max(floor);
            if rel > worst || rel.is_nan() {
                worst = rel;
                at = t;
            }
        }
        if !(worst <= DERIVATIVE_RTOL) {
            report.issues.push(ValidationIssue::DerivativeMismatch { name, max_rel_err: worst, at });
        }
        worst
    };
    report.da_max_rel_err = check(&coeffs.a, &coeffs.da, "da", &mut report);
    report.dd_max_rel_err = check(&coeffs.d, &coeffs.dd, "dd", &mut report);
    Ok(report)
}
