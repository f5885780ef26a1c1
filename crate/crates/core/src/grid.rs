//! Sampled space-time fields and the finite-difference stencils used on them.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// `values[j][i]` is the field at `(xs[i], ts[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { b } else { a + h * i as f64 }).collect()
        }
    }
}

/// `n` logarithmically spaced points from `a` to `b` inclusive (`0 < a < b`).
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    uniform(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

impl GridField {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != ts.len() || values.iter().any(|row| row.len() != xs.len()) {
            return Err(Error::Invalid(format!(
                "field shape does not match grid {} x {}",
                ts.len(),
                xs.len()
            )));
        }
        for w in xs.windows(2).chain(ts.windows(2)) {
            if !(w[1] > w[0]) {
                return Err(Error::Invalid("grid must be strictly increasing".into()));
            }
        }
        Ok(Self { xs, ts, values })
    }

    /// Samples `f(x, t)` on the tensor grid.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(xs: &[f64], ts: &[f64], f: F) -> Self {
        let values = ts.iter().map(|&t| xs.iter().map(|&x| f(x, t)).collect()).collect();
        Self { xs: xs.to_vec(), ts: ts.to_vec(), values }
    }

    /// Spacing of a uniform x-grid.
    pub fn dx(&self) -> Result<f64> {
        uniform_spacing(&self.xs)
    }

    pub fn last_row(&self) -> &[f64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise difference to a field on the same grid.
    pub fn max_abs_diff(&self, other: &GridField) -> Result<f64> {
        if self.xs.len() != other.xs.len() || self.ts.len() != other.ts.len() {
            return Err(Error::Invalid("fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// CSV with header `t,x,<name>`, rows ordered by t then x.
    pub fn write_csv<W: Write>(&self, mut w: W, name: &str) -> io::Result<()> {
        writeln!(w, "t,x,{name}")?;
        for (t, row) in self.ts.iter().zip(&self.values) {
            for (x, v) in self.xs.iter().zip(row) {
                writeln!(w, "{},{},{}", fmt17(*t), fmt17(*x), fmt17(*v))?;
            }
        }
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn uniform_spacing(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::Invalid("grid needs at least two points".into()));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let uniform = xs.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
    if !uniform || !(h > 0.0) {
        return Err(Error::Invalid("x-grid must be uniform and increasing".into()));
    }
    Ok(h)
}

/// Fourth-order first derivative; one-sided five-point formulas at the two
/// outermost points on each side. Needs at least 5 points.
pub fn d1_4th(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 5 {
        return Err(Error::Invalid(format!("4th-order stencil needs 5 points, got {n}")));
    }
    let s = 12.0 * h;
    let mut d = vec![0.0; n];
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / s;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / s;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / s;
    }
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / s;
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / s;
    Ok(d)
}

/// Fourth-order second derivative; one-sided six-point formulas near the
/// edges. Needs at least 6 points.
pub fn d2_4th(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 6 {
        return Err(Error::Invalid(format!("4th-order second-derivative stencil needs 6 points, got {n}")));
    }
    let s = 12.0 * h * h;
    let mut d = vec![0.0; n];
    d[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]) / s;
    d[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) / s;
    for i in 2..n - 2 {
        d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / s;
    }
    d[n - 2] = (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4] - 6.0 * f[n - 5] + f[n - 6]) / s;
    d[n - 1] =
        (45.0 * f[n - 1] - 154.0 * f[n - 2] + 214.0 * f[n - 3] - 156.0 * f[n - 4] + 61.0 * f[n - 5] - 10.0 * f[n - 6]) / s;
    Ok(d)
}

/// Second-order time derivative at the interior level `j` of a possibly
/// non-uniform time grid.
pub fn dt_central(rows: &[Vec<f64>], ts: &[f64], j: usize) -> Vec<f64> {
    let (h0, h1) = (ts[j] - ts[j - 1], ts[j + 1] - ts[j]);
    let (wm, w0, wp) = (-h1 / (h0 * (h0 + h1)), (h1 - h0) / (h0 * h1), h0 / (h1 * (h0 + h1)));
    (0..rows[j].len())
        .map(|i| wm * rows[j - 1][i] + w0 * rows[j][i] + wp * rows[j + 1][i])
        .collect()
}
