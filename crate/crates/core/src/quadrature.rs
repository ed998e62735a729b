//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature for complex-valued integrands
//! on finite intervals, plus a periodic trapezoid rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_958_109_831,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
/// 10-point Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 20_000 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

/// One 21-point Kronrod panel: (Kronrod value, |Kronrod − Gauss|).
fn panel<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[10];
    let mut g = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    ((k * h), ((k - g) * h).norm())
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, first splitting at the given interior `breaks`.
pub fn integrate_with_breaks<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("quadrature limits must be finite".into()));
    }
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a.min(b) && x < a.max(b)))
        .chain(std::iter::once(b))
        .collect();
    if b >= a {
        pts.sort_by(f64::total_cmp);
    } else {
        pts.sort_by(|x, y| y.total_cmp(x));
    }
    pts.dedup();
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = panel(&mut f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Piece { a: w[0], b: w[1], value: v, error: e });
    }
    let mut intervals = heap.len();
    while err > opts.abs_tol.max(opts.rel_tol * total.norm()) {
        if intervals >= opts.max_intervals {
            return Err(Error::Numerical(format!(
                "adaptive quadrature hit {intervals} intervals with error estimate {err:e}"
            )));
        }
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if m == worst.a || m == worst.b {
            // Interval below floating-point resolution; accept its contribution.
            heap.push(Piece { error: 0.0, ..worst });
            err = heap.iter().map(|p| p.error).sum();
            if heap.iter().all(|p| p.error == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = panel(&mut f, worst.a, m);
        let (v2, e2) = panel(&mut f, m, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: worst.b, value: v2, error: e2 });
        intervals += 1;
        if intervals % 64 == 0 {
            // Re-sum to avoid drift in the running totals.
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, intervals })
}

pub fn integrate<F: FnMut(f64) -> Complex64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, a, b, &[], opts)
}

pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    Ok(integrate(|x| Complex64::new(f(x), 0.0), a, b, opts)?.value.re)
}

/// Trapezoid rule for a `period`-periodic integrand with `n` nodes.
pub fn periodic_trapezoid<F: FnMut(f64) -> Complex64>(mut f: F, period: f64, n: usize) -> Complex64 {
    let h = period / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<Complex64>() * h
}
