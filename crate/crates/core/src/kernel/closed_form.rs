use std::f64::consts::PI;

use crate::coefficients::{CoefficientProfile, ProfileKind};
use crate::error::{Error, Result};

use super::KernelFn;

/// Textbook kernels of the four built-in equations, written out directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `u_t = a u_xx`
    Heat { a: f64 },
    /// `tau u_t = lambda^2 u_xx + u`
    Cable { lambda: f64, tau: f64 },
    /// `u_t = u_xx + x u_x + u`
    FokkerPlanck,
    /// `u_t = a u_xx + (g - k x) u_x`
    OuDrift { a: f64, k: f64, g: f64 },
}

impl ClosedForm {
    pub fn from_profile(profile: &CoefficientProfile) -> Result<Self> {
        let p = |name: &str| {
            profile
                .params
                .get(name)
                .copied()
                .ok_or_else(|| Error::Parameter(format!("missing parameter '{name}'")))
        };
        let form = match profile.kind {
            ProfileKind::ConstantHeat => ClosedForm::Heat { a: p("a")? },
            ProfileKind::Cable => ClosedForm::Cable { lambda: p("lambda")?, tau: p("tau")? },
            ProfileKind::FokkerPlanck => ClosedForm::FokkerPlanck,
            ProfileKind::OuDrift => ClosedForm::OuDrift { a: p("a")?, k: p("k")?, g: p("g")? },
            ProfileKind::Custom => {
                return Err(Error::Parameter("custom profiles have no closed-form kernel".into()));
            }
        };
        form.check()?;
        Ok(form)
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            ClosedForm::Heat { a } => a > 0.0,
            ClosedForm::Cable { lambda, tau } => lambda != 0.0 && tau > 0.0,
            ClosedForm::FokkerPlanck => true,
            ClosedForm::OuDrift { a, k, g } => a > 0.0 && k > 0.0 && g.is_finite(),
        };
        if !ok {
            return Err(Error::Parameter(format!("invalid closed-form parameters {self:?}")));
        }
        Ok(())
    }
}

impl KernelFn for ClosedForm {
    fn log_eval(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain { t, lo: 0.0, hi: f64::INFINITY });
        }
        self.check()?;
        let r = x - y;
        let v = match *self {
            ClosedForm::Heat { a } => -0.5 * (4.0 * PI * a * t).ln() - r * r / (4.0 * a * t),
            ClosedForm::Cable { lambda, tau } => {
                let l2 = lambda * lambda;
                0.5 * tau.ln() + t / tau - 0.5 * (4.0 * PI * l2 * t).ln() - tau * r * r / (4.0 * l2 * t)
            }
            ClosedForm::FokkerPlanck => {
                let m = -(-2.0 * t).exp_m1();
                let s = x - (-t).exp() * y;
                -0.5 * (2.0 * PI * m).ln() - s * s / (2.0 * m)
            }
            ClosedForm::OuDrift { a, k, g } => {
                let sh = (k * t).sinh();
                let num = k * (x * (-0.5 * k * t).exp() - y * (0.5 * k * t).exp()) + 2.0 * g * (0.5 * k * t).sinh();
                0.5 * k.ln() + 0.5 * k * t - 0.5 * (4.0 * PI * a * sh).ln() - num * num / (4.0 * a * k * sh)
            }
        };
        Ok(v)
    }
}
