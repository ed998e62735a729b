use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, ComplexMatrix, C64};

/// `det[K(z_j, z_l)]` with `K(z, w) = (1/π) exp(−(|z|² + |w|²)/2 + z̄ w)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GinibreKernelEval {
    pub points: Vec<C64>,
    pub kernel: ComplexMatrix,
    pub determinant: f64,
}

pub fn ginibre_kernel_entry(z: C64, w: C64) -> C64 {
    (z.conj() * w - 0.5 * (z.norm_sqr() + w.norm_sqr())).exp() / std::f64::consts::PI
}

pub fn ginibre_kernel(points: &[C64]) -> Result<GinibreKernelEval> {
    if points.is_empty() {
        return Err(Error::InvalidInput("need at least one point".into()));
    }
    let k = points.len();
    let kernel = ComplexMatrix::from_fn(k, k, |j, l| ginibre_kernel_entry(points[j], points[l]));
    // The kernel matrix is Hermitian PSD, so the determinant is real.
    let determinant = det(&kernel)?.re;
    Ok(GinibreKernelEval { points: points.to_vec(), kernel, determinant })
}

/// Bulk pair correlation `ρ⁽²⁾/ρ⁽¹⁾² = 1 − e^{−r²}`.
pub fn ginibre_pair_correlation(r: f64) -> f64 {
    -(-r * r).exp_m1()
}

/// Average of `1 − e^{−r²}` over the annulus `r₁ ≤ |ζ| < r₂` (area weighting).
pub fn ginibre_pair_correlation_bin(r1: f64, r2: f64) -> f64 {
    let (a, b) = (r1 * r1, r2 * r2);
    if b - a <= 1e-14 * b.max(1e-300) {
        return ginibre_pair_correlation(0.5 * (r1 + r2));
    }
    // ∫ (1 − e^{−u}) du / (b − a) over u = r², with e^{−a} − e^{−b} = e^{−a}(1 − e^{−(b−a)}).
    1.0 - (-a).exp() * (a - b).exp_m1().abs() / (b - a)
}
