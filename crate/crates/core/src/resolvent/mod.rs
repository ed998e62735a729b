//! Hermitisation `𝓗_z = [[0, A − z], [(A − z)^*, 0]]` and its resolvent
//! `G_z(η) = (𝓗_z − iη)^{-1}`, evaluated from one SVD of `A − z`.
//!
//! Traces use `⟨X⟩ = N^{-1} tr X` for both N×N and 2N×2N matrices.

pub mod audit;
pub mod dense;
pub mod identities;
mod traces;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{svd_via_hermitisation, ComplexMatrix, C64};

pub use audit::{audit_assumptions, AssumptionReport, AuditCell, AuditGrid, AuditThresholds};
pub use identities::{
    fischer_check, girko_check, logdet_identity_check, minor_resolvent_check, FischerCheck, GaussianBump, GirkoCheck,
    GirkoGrid, LogdetCheck, MinorCheck, RadialBump, TestFunction,
};
pub use traces::BlockOp;

/// `[[0, A − z], [(A − z)^*, 0]]`.
pub fn hermitise(a: &ComplexMatrix, z: C64) -> ComplexMatrix {
    let x = a.shifted(z);
    let zero = ComplexMatrix::zeros(a.rows(), a.cols());
    ComplexMatrix::from_blocks(&zero, &x, &x.adjoint(), &zero)
}

/// `A − z = U diag(s) V^*` together with `W = V^* U`.
#[derive(Clone, Debug)]
pub struct HermitisationFactorization {
    pub z: C64,
    pub s: Vec<f64>,
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub w: ComplexMatrix,
    pub w_diag: Vec<C64>,
    w_adj: ComplexMatrix,
}

impl HermitisationFactorization {
    pub fn n(&self) -> usize {
        self.s.len()
    }

    /// `⟨H_z(η)⟩ = mean 1/(η² + s²)` with `H = (η² + |A − z|²)^{-1}`.
    pub fn mean_h(&self, eta: f64) -> f64 {
        let e2 = eta * eta;
        self.s.iter().map(|s| 1.0 / (e2 + s * s)).sum::<f64>() / self.n() as f64
    }

    /// `d⟨H⟩/dη`.
    pub fn mean_h_derivative(&self, eta: f64) -> f64 {
        let e2 = eta * eta;
        -2.0 * eta * self.s.iter().map(|s| 1.0 / (e2 + s * s).powi(2)).sum::<f64>() / self.n() as f64
    }

    /// `(1/N) log|det(𝓗_z − iη)| = (1/N) Σ log(η² + s_i²)`.
    pub fn log_abs_det_shifted(&self, eta: f64) -> f64 {
        let e2 = eta * eta;
        self.s.iter().map(|s| (e2 + s * s).ln()).sum::<f64>() / self.n() as f64
    }

    pub fn min_singular_value(&self) -> f64 {
        self.s.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn factorize(a: &ComplexMatrix, z: C64) -> Result<HermitisationFactorization> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::InvalidInput(format!("expected a nonempty square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let svd = svd_via_hermitisation(&a.shifted(z))?;
    let w = svd.v.adjoint_matmul(&svd.u);
    let w_diag = w.diag();
    let w_adj = w.adjoint();
    Ok(HermitisationFactorization { z, s: svd.s, u: svd.u, v: svd.v, w, w_diag, w_adj })
}

/// The scalar traces of the resolvent used throughout.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResolventDiagnostics {
    pub eta: f64,
    /// `η⟨H⟩ = ½ Im⟨G⟩`.
    pub g: f64,
    /// `η²⟨H H̃⟩ = −⟨G E G E^*⟩`.
    pub alpha: f64,
    /// `η⟨H²(A − z)⟩ = (1/2i)⟨G² E^*⟩`.
    pub beta: C64,
    /// `η²⟨H²⟩`.
    pub gamma: f64,
    /// `⟨(H(A − z))²⟩`.
    pub delta: C64,
    /// `α + |β|²/γ`.
    pub sigma: f64,
    /// `(β² + γδ)/(γσ)`.
    pub tau: C64,
    /// `η²/t − (1/N) log|det(𝓗 − iη)|`, present when `t` is given.
    pub phi: Option<f64>,
}

pub fn diagnostics(f: &HermitisationFactorization, eta: f64, t: Option<f64>) -> Result<ResolventDiagnostics> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
    }
    if let Some(t) = t {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
        }
    }
    let n = f.n();
    let nf = n as f64;
    let e2 = eta * eta;
    let d: Vec<f64> = f.s.iter().map(|s| 1.0 / (e2 + s * s)).collect();
    let g = eta * d.iter().sum::<f64>() / nf;
    let gamma = e2 * d.iter().map(|x| x * x).sum::<f64>() / nf;
    let mut alpha = 0.0;
    let mut delta = C64::new(0.0, 0.0);
    for j in 0..n {
        let wj = f.w.col(j);
        let wt = f.w_adj.col(j); // conj of row j of W
        for i in 0..n {
            let dij = d[i] * d[j];
            alpha += wj[i].norm_sqr() * dij;
            // W_ij W_ji = W_ij conj(W^*_ij)
            delta += wj[i] * wt[i].conj() * (f.s[i] * f.s[j] * dij);
        }
    }
    alpha *= e2 / nf;
    delta /= nf;
    let beta = f.w_diag.iter().zip(&f.s).zip(&d).map(|((w, s), di)| w * (s * di * di)).sum::<C64>() * (eta / nf);
    let sigma = alpha + beta.norm_sqr() / gamma;
    let tau = (beta * beta + delta * gamma) / (gamma * sigma);
    let phi = t.map(|t| e2 / t - f.log_abs_det_shifted(eta));
    Ok(ResolventDiagnostics { eta, g, alpha, beta, gamma, delta, sigma, tau, phi })
}

/// `⟨G B⟩`.
pub fn trace_single(f: &HermitisationFactorization, eta: f64, op: BlockOp) -> C64 {
    traces::single(f, eta, op)
}

/// `⟨G(η₁) B₁ G(η₂) B₂⟩` in O(N²).
pub fn trace_pair(f: &HermitisationFactorization, first: (f64, BlockOp), second: (f64, BlockOp)) -> C64 {
    traces::pair(f, first, second)
}

/// `⟨G(η₁) B₁ ⋯ G(η_k) B_k⟩` for any chain length (O(N³) per factor beyond two).
pub fn trace_chain(f: &HermitisationFactorization, chain: &[(f64, BlockOp)]) -> C64 {
    traces::chain(f, chain)
}

/// `⟨G Z⟩` for `Z = [[0, w], [w̄, 0]]`; real by block symmetry.
pub fn trace_z(f: &HermitisationFactorization, eta: f64, w: C64) -> C64 {
    w * traces::single(f, eta, BlockOp::E) + w.conj() * traces::single(f, eta, BlockOp::EAdj)
}
