//! Run configuration: a JSON document merged under the command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use riccati_heat::coefficients::{CoefficientProfile, ProfileKind};
use riccati_heat::grid::uniform;
use riccati_heat::kernel::InitialData;
use serde::Deserialize;

/// Why a run stopped; each kind maps to its own exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Validation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl From<riccati_heat::Error> for Failure {
    fn from(e: riccati_heat::Error) -> Self {
        match e {
            riccati_heat::Error::Parameter(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

/// ```json
/// {
///   "command": "solve",
///   "coefficients": {"profile": "ou-drift", "params": {"k": 2}, "T": 2},
///   "grid": "-4:4:161",
///   "t": 0.5,
///   "phi": "gaussian",
///   "tol": 1e-12,
///   "output": "u.csv"
/// }
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub coefficients: Option<CoefficientProfile>,
    pub grid: Option<String>,
    pub t: Option<f64>,
    pub tol: Option<f64>,
    pub phi: Option<String>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub gnuplot: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }
}

/// `a:b:n`, `n >= 2` points from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self, Failure> {
        let bad = || Failure::Config(format!("grid '{s}' is not of the form a:b:n"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
            return Err(Failure::Config(format!("grid '{s}' needs a < b and n >= 2")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        uniform(self.lo, self.hi, self.n)
    }
}

/// Initial data by name: `gaussian`, `constant:V`, `box:W` (indicator of
/// `|x| <= W`) or `csv:PATH` (columns `x,value`, linear interpolation).
pub fn parse_phi(s: &str) -> Result<InitialData, Failure> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let number = |what: &str| -> Result<f64, Failure> {
        arg.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Failure::Config(format!("phi '{s}': {what} must be a finite number")))
    };
    match kind {
        "gaussian" if arg.is_empty() => Ok(InitialData::gaussian()),
        "constant" => Ok(InitialData::constant(number("value")?)),
        "box" => {
            let w = number("half-width")?;
            if !(w > 0.0) {
                return Err(Failure::Config(format!("phi '{s}': half-width must be positive")));
            }
            Ok(InitialData::function(move |x| if x.abs() <= w { 1.0 } else { 0.0 }).with_half_width(w)?)
        }
        "csv" => read_sampled(Path::new(arg)),
        _ => Err(Failure::Config(format!("unknown initial data '{s}' (gaussian, constant:V, box:W, csv:PATH)"))),
    }
}

fn read_sampled(path: &Path) -> Result<InitialData, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E')) {
            continue;
        }
        let mut cols = line.split(',').map(|c| c.trim().parse::<f64>());
        match (cols.next(), cols.next()) {
            (Some(Ok(x)), Some(Ok(v))) => {
                xs.push(x);
                vs.push(v);
            }
            _ => return Err(Failure::Config(format!("{}:{}: expected 'x,value'", path.display(), i + 1))),
        }
    }
    Ok(InitialData::sampled(xs, vs)?)
}

/// Profile from `--profile` and `--param NAME=VALUE`, falling back to the
/// config document and finally to the constant-heat profile.
pub fn resolve_profile(
    name: Option<&str>,
    params: &[String],
    domain_end: Option<f64>,
    config: Option<&CoefficientProfile>,
    default_end: f64,
) -> Result<CoefficientProfile, Failure> {
    let mut profile = match (name, config) {
        (Some(n), Some(c)) if ProfileKind::parse(n)? == c.kind => c.clone(),
        (Some(n), _) => {
            let kind = ProfileKind::parse(n)?;
            if kind == ProfileKind::Custom {
                return Err(Failure::Config("custom coefficients must come from --config".into()));
            }
            CoefficientProfile::with_defaults(kind, default_end)
        }
        (None, Some(c)) => c.clone(),
        (None, None) => CoefficientProfile::with_defaults(ProfileKind::ConstantHeat, default_end),
    };
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("parameter '{p}' is not NAME=VALUE")))?;
        let v: f64 = v.trim().parse().map_err(|_| Failure::Config(format!("parameter '{p}' has no numeric value")))?;
        let known = profile.kind.default_params().iter().any(|(name, _)| *name == k.trim());
        if !known {
            return Err(Failure::Config(format!("profile {} has no parameter '{k}'", profile.kind)));
        }
        profile = profile.param(k.trim(), v);
    }
    if let Some(t) = domain_end {
        profile.domain_end = t;
    }
    if !(profile.domain_end > 0.0) {
        return Err(Failure::Config(format!("T = {} must be positive", profile.domain_end)));
    }
    Ok(profile)
}
