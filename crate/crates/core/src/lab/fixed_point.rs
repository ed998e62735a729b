use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resolvent::{diagnostics, HermitisationFactorization};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub eta_star: f64,
    /// Final bracket `[lo, hi]` on which `t⟨H(η)⟩ − 1` changes sign.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `t⟨H(η★)⟩ − 1`.
    pub residual: f64,
    /// Midpoint of the bisection bracket before the Newton polish.
    pub bisection_eta: f64,
    pub sigma_star: f64,
}

/// Bracket expansion stops at these multiples of `t`.
const BRACKET_MIN: f64 = 1e-12;
const BRACKET_MAX: f64 = 1e12;

/// Unique root of the strictly decreasing `η ↦ t⟨H_z(η)⟩ − 1`.
pub fn solve_eta_star(f: &HermitisationFactorization, t: f64) -> Result<FixedPointResult> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    let resid = |eta: f64| t * f.mean_h(eta) - 1.0;
    let (mut lo, mut hi) = (1e-3 * t, 1e3 * t);
    while resid(lo) <= 0.0 {
        if lo <= BRACKET_MIN * t {
            return Err(Error::NoSolution(format!(
                "t<H(eta)> < 1 down to eta = {lo:e}; z is too far from the spectrum of A for t = {t}"
            )));
        }
        hi = lo;
        lo *= 1e-3;
    }
    while resid(hi) >= 0.0 {
        if hi >= BRACKET_MAX * t {
            return Err(Error::NoSolution(format!("t<H(eta)> > 1 up to eta = {hi:e}")));
        }
        lo = hi;
        hi *= 1e3;
    }
    let mut iterations = 0;
    while (hi - lo) > 1e-13 * hi && iterations < 400 {
        // Geometric midpoint while the bracket spans decades.
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if resid(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let bisection_eta = 0.5 * (lo + hi);
    let mut eta = bisection_eta;
    for _ in 0..8 {
        let r = resid(eta);
        let d = t * f.mean_h_derivative(eta);
        if d == 0.0 || r == 0.0 {
            break;
        }
        let next = eta - r / d;
        iterations += 1;
        if !(next > 0.0) || (next - eta).abs() <= 1e-16 * eta {
            break;
        }
        eta = next;
    }
    let residual = resid(eta);
    let sigma_star = diagnostics(f, eta, Some(t))?.sigma;
    Ok(FixedPointResult { eta_star: eta, bracket: (lo, hi), iterations, residual, bisection_eta, sigma_star })
}
