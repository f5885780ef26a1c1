//! Adaptive Gauss–Kronrod (G10/K21) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_877_378,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Number of equal pieces the interval is split into before adapting.
    pub initial_pieces: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 1 << 12,
            initial_pieces: 1,
        }
    }
}

impl QuadOptions {
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            ..Self::default()
        }
    }

    pub fn tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn pieces(mut self, n: usize) -> Self {
        self.initial_pieces = n.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
    /// Final partition of the interval, sorted by left endpoint.
    pub partition: Vec<(f64, f64)>,
}

/// Single 21-point Kronrod estimate with a QUADPACK-style error estimate.
pub fn gk21<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Composite 21-point rule over a fixed partition.
pub fn fixed<F: FnMut(f64) -> f64>(mut f: F, partition: &[(f64, f64)]) -> f64 {
    partition.iter().map(|&(a, b)| gk21(&mut f, a, b).0).sum()
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, subdivisions: 0, partition: vec![(a, b)] });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Invalid(format!("quadrature limits must be finite: [{a}, {b}]")));
    }
    let n0 = opts.initial_pieces.max(1);
    let mut heap = BinaryHeap::with_capacity(opts.max_subdivisions + n0);
    let width = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { a + width * (i + 1) as f64 };
        let (value, error) = gk21(&mut f, lo, hi);
        heap.push(Piece { a: lo, b: hi, value, error });
    }
    let mut subdivisions = 0usize;
    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(s, e), p| (s + p.value, e + p.error));
        if !total.is_finite() {
            return Err(Error::NonFinite { what: "quadrature sum", t: f64::NAN });
        }
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol {
            return Ok(finish(heap, subdivisions));
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::Quadrature { error: err, intervals: subdivisions });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            let (_, err) = heap.iter().fold((0.0, 0.0), |(s, e), p| (s + p.value, e + p.error));
            return Err(Error::Quadrature { error: err, intervals: subdivisions });
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        subdivisions += 1;
    }
}

fn finish(heap: BinaryHeap<Piece>, subdivisions: usize) -> QuadResult {
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    // summation in left-to-right order keeps results reproducible
    let value = pieces.iter().map(|p| p.value).sum();
    let error = pieces.iter().map(|p| p.error).sum();
    QuadResult {
        value,
        error,
        subdivisions,
        partition: pieces.iter().map(|p| (p.a, p.b)).collect(),
    }
}
