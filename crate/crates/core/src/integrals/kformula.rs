use serde::{Deserialize, Serialize};

use super::{fourier_line, sphere_integral_mc};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::quadrature::QuadOptions;
use crate::resolvent::{factorize, HermitisationFactorization};

/// Truncation level of `∏(1 + p²d_i²)^{-1/2}` for the p-integral.
pub const P_INTEGRAND_FLOOR: f64 = 1e-16;

/// `K̃ = b·∫_S exp(−(N/t)‖(A − w)v‖²) dS(v)` via
/// `(1/t)√(N/2πt) e^{Nη²/t} det(η² + |A − w|²)^{-1} ∫ e^{iNp/t} ∏(1 + ip d_i)^{-1} dp`,
/// `d_i = 1/(η² + s_i²)`. Any `η > 0` gives the same value.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KContour {
    pub value: f64,
    pub log_value: f64,
    /// `|Im I| / |Re I|` for the p-integral `I`; zero up to quadrature error.
    pub imag_ratio: f64,
    /// Quadrature error estimate of `I`, relative to `|I|`.
    pub rel_error: f64,
    /// `|p|` truncation point.
    pub cutoff: f64,
    /// Analytic bound on the discarded `|p| > cutoff` mass before tail correction, relative to `|I|`.
    pub tail_bound: f64,
}

fn log_prefactor(n_global: usize, t: f64, eta: f64, s: &[f64]) -> f64 {
    let nf = n_global as f64;
    -t.ln() + 0.5 * (nf / (std::f64::consts::TAU * t)).ln() + nf * eta * eta / t
        - s.iter().map(|x| (eta * eta + x * x).ln()).sum::<f64>()
}

/// Contour formula for `K̃` with `A_proj` of dimension `n ≤ N` and global size `N`.
pub fn k_contour_formula(a_proj: &ComplexMatrix, w: C64, eta: f64, t: f64, n_global: usize) -> Result<KContour> {
    if !(eta > 0.0 && t > 0.0) {
        return Err(Error::InvalidInput(format!("need eta > 0 and t > 0, got eta = {eta}, t = {t}")));
    }
    let f = factorize(a_proj, w)?;
    if n_global < f.n() {
        return Err(Error::InvalidInput(format!("global N = {n_global} below the projected dimension {}", f.n())));
    }
    contour_from_factorization(&f, eta, t, n_global)
}

fn contour_from_factorization(f: &HermitisationFactorization, eta: f64, t: f64, n_global: usize) -> Result<KContour> {
    let d: Vec<f64> = f.s.iter().map(|s| 1.0 / (eta * eta + s * s)).collect();
    let log_decay = |p: f64| -0.5 * d.iter().map(|di| (p * p * di * di).ln_1p()).sum::<f64>();
    let floor = P_INTEGRAND_FLOOR.ln();
    let dmax = d.iter().copied().fold(0.0, f64::max);
    let omega = n_global as f64 / t;
    let n = d.len() as f64;
    // Stop once the integrand is negligible or the first neglected tail term is.
    let remainder = |p: f64| (log_decay(p).exp() * (n + 1.0) * (n + 2.0) / (p * p * omega.powi(3))) * dmax;
    let mut cutoff = 1.0 / dmax;
    while log_decay(cutoff) > floor && remainder(cutoff) > 1e-14 {
        cutoff *= 2.0;
        if !cutoff.is_finite() {
            return Err(Error::Numerical("p-integrand never drops below the truncation floor".into()));
        }
    }
    let g = |p: f64| d.iter().fold(C64::new(1.0, 0.0), |acc, di| acc / C64::new(1.0, p * di));
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-11, max_intervals: 200_000 };
    let (integral, err) = fourier_line(g, omega, cutoff, opts).map_err(|e| {
        Error::Numerical(format!("p-integral failed with cutoff {cutoff:.3e} ({} factors): {e}", d.len()))
    })?;
    let n = d.len();
    let tail_bound = if n >= 2 {
        let ln_prod_d: f64 = d.iter().map(|x| x.ln()).sum();
        2.0 * ((1.0 - n as f64) * cutoff.ln() - ln_prod_d - ((n - 1) as f64).ln()).exp()
    } else {
        f64::INFINITY
    };
    let re = integral.re;
    if !(re > 0.0) {
        return Err(Error::Numerical(format!("p-integral has nonpositive real part {re:e}")));
    }
    let log_value = log_prefactor(n_global, t, eta, &f.s) + re.ln();
    Ok(KContour {
        value: log_value.exp(),
        log_value,
        imag_ratio: integral.im.abs() / re,
        rel_error: err / integral.norm(),
        cutoff,
        tail_bound: tail_bound / integral.norm(),
    })
}

/// Contour formula at the saddle `η`, where `Σ_i 1/(η² + s_i²) = N/t`. Shifting to the
/// saddle avoids the cancellation in the p-integral that large `η` produces.
pub fn k_contour_saddle(a_proj: &ComplexMatrix, w: C64, t: f64, n_global: usize) -> Result<KContour> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("need t > 0, got {t}")));
    }
    let f = factorize(a_proj, w)?;
    if n_global < f.n() {
        return Err(Error::InvalidInput(format!("global N = {n_global} below the projected dimension {}", f.n())));
    }
    contour_from_factorization(&f, saddle_eta(&f.s, n_global as f64 / t), t, n_global)
}

fn saddle_eta(s: &[f64], omega: f64) -> f64 {
    let sum = |eta: f64| s.iter().map(|x| 1.0 / (eta * eta + x * x)).sum::<f64>();
    let smax = s.iter().copied().fold(0.0, f64::max);
    // sum is decreasing in η; below `lo` the integrand near p = 0 is already well resolved.
    let lo = 1e-3 * (1.0 / omega).sqrt();
    if sum(lo) <= omega {
        return lo;
    }
    let mut hi = (s.len() as f64 / omega).sqrt() + smax;
    let mut lo = lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum(mid) > omega {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `K̃` by uniform sphere Monte Carlo: `b·Vol(S)·E[exp(−(N/t)‖(A − w)v‖²)]`, with
/// `b = (1/t)√(N/2πt)(N/πt)^{n−1}`. Returns (estimate, stderr).
pub fn k_direct_mc(
    a_proj: &ComplexMatrix,
    w: C64,
    t: f64,
    n_global: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let n = a_proj.rows();
    if !a_proj.is_square() || n == 0 || n_global < n {
        return Err(Error::InvalidInput("A_proj must be square with dimension ≤ N".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let x = a_proj.shifted(w);
    let scale = n_global as f64 / t;
    let (m, se) = sphere_integral_mc(
        |v| {
            let y = x.matvec(v);
            (-scale * y.iter().map(|c| c.norm_sqr()).sum::<f64>()).exp()
        },
        n,
        samples,
        seed,
    );
    let nf = n_global as f64;
    let log_b = -t.ln()
        + 0.5 * (nf / (std::f64::consts::TAU * t)).ln()
        + (n as f64 - 1.0) * (nf / (std::f64::consts::PI * t)).ln();
    let b = log_b.exp();
    Ok((b * m, b * se))
}

/// `dν(v) = K^{-1} exp(−v^* Q v + (N/t)η²) dS(v)` with `Q = (N/t)(η² + |A − w|²)`,
/// `|X|² = X^* X`, diagonal in the right singular basis of `A − w`.
#[derive(Clone, Debug)]
pub struct TiltedSphereMeasure {
    /// Eigenvalues of `Q`, in the order of the singular values.
    pub q: Vec<f64>,
    /// `log K`, the unnormalized sphere integral `∫ exp(−(N/t)‖(A − w)v‖²) dS`.
    pub log_normalizer: f64,
    /// Right singular vectors of `A − w`, the eigenbasis of `Q`.
    pub eigen_basis: ComplexMatrix,
    pub(crate) factorization: HermitisationFactorization,
    pub eta: f64,
    pub t: f64,
    pub n_global: usize,
}

impl TiltedSphereMeasure {
    pub fn new(a_proj: &ComplexMatrix, w: C64, eta: f64, t: f64, n_global: usize) -> Result<Self> {
        let f = factorize(a_proj, w)?;
        let n = f.n();
        if n_global < n {
            return Err(Error::InvalidInput(format!("global N = {n_global} below the projected dimension {n}")));
        }
        let k = contour_from_factorization(&f, saddle_eta(&f.s, n_global as f64 / t), t, n_global)?;
        let nf = n_global as f64;
        let log_b = -t.ln()
            + 0.5 * (nf / (std::f64::consts::TAU * t)).ln()
            + (n as f64 - 1.0) * (nf / (std::f64::consts::PI * t)).ln();
        let q = f.s.iter().map(|s| nf / t * (eta * eta + s * s)).collect();
        Ok(Self {
            q,
            log_normalizer: k.log_value - log_b,
            eigen_basis: f.v.clone(),
            factorization: f,
            eta,
            t,
            n_global,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}
