//! Leading-order predictors for `F̃` and `K̃`. Everything carrying `e^{±Nφ}` stays in log
//! space; only the φ-free product `F̃·K̃` is compared against direct evaluation.

use serde::{Deserialize, Serialize};

use super::{expected_abs_det_sq, k_contour_saddle, TiltedSphereMeasure};
use crate::error::{Error, Result};
use crate::lab::{ginibre_kernel, solve_eta_star};
use crate::linalg::{ComplexMatrix, C64};
use crate::resolvent::{diagnostics, factorize, trace_z, HermitisationFactorization, ResolventDiagnostics};
use crate::rng::{complex_normal, stream, streams};
use crate::schur::project_chain;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticIngredients {
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub eta_star: f64,
    pub diagnostics: ResolventDiagnostics,
    pub psi_values: Vec<f64>,
    /// `log b_{N,i}`, `b_{N,i} = (1/t)√(N/2πt)(N/πt)^{N−i}`.
    pub log_b: Vec<f64>,
    /// `log d_N`, `d_N = π^{-k}(Nt/2π)^{k/2}(N/πt)^{(N−k)²}`.
    pub log_d: f64,
    /// `log f_{N,k}`.
    pub log_f: f64,
    /// `|det V_i^* G V_i|` used in the predictions.
    pub det_factors: Vec<f64>,
    pub log_f_pred: f64,
    pub log_k_pred: Vec<f64>,
}

/// `|det V^* G_z(η) V| = η²(v^*Hv)(v^*H̃v) + |v^*H(A − z)v|²` for `V = 1₂ ⊗ v`.
pub fn det_form_value(f: &HermitisationFactorization, eta: f64, v: &[C64]) -> f64 {
    let d: Vec<f64> = f.s.iter().map(|s| 1.0 / (eta * eta + s * s)).collect();
    let uv = f.u.adjoint_matvec(v);
    let vv = f.v.adjoint_matvec(v);
    let hv: f64 = uv.iter().zip(&d).map(|(c, di)| di * c.norm_sqr()).sum();
    let htv: f64 = vv.iter().zip(&d).map(|(c, di)| di * c.norm_sqr()).sum();
    let cross: C64 =
        uv.iter().zip(&vv).zip(d.iter().zip(&f.s)).map(|((u, w), (di, si))| u.conj() * w * (di * si)).sum();
    eta * eta * hv * htv + cross.norm_sqr()
}

/// Predictions at bulk point `z` for rescaled offsets `z_offsets`. `det_factors` supplies
/// `|det V_i^* G^{(i−1)} V_i|` per point; when absent, the concentration value
/// `t²(αγ + |β|²)/η²` is used for each.
pub fn asymptotic_predictors(
    a: &ComplexMatrix,
    z: C64,
    t: f64,
    z_offsets: &[C64],
    det_factors: Option<&[f64]>,
) -> Result<AsymptoticIngredients> {
    let k = z_offsets.len();
    let n = a.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("{k} offsets for N = {n}")));
    }
    let f = factorize(a, z)?;
    let fp = solve_eta_star(&f, t)?;
    let eta = fp.eta_star;
    let diag = diagnostics(&f, eta, Some(t))?;
    let nf = n as f64;
    let kf = k as f64;
    let (sigma, gamma) = (diag.sigma, diag.gamma);
    let phi = diag.phi.expect("t supplied");

    let psi_values: Vec<f64> = z_offsets
        .iter()
        .map(|&zi| {
            let gz = trace_z(&f, eta, zi).re;
            (-(nf / sigma).sqrt() * gz - (diag.tau.conj() * zi * zi).re + zi.norm_sqr()).exp()
        })
        .collect();
    let dets: Vec<f64> = match det_factors {
        Some(d) if d.len() == k => d.to_vec(),
        Some(d) => return Err(Error::DimensionMismatch(format!("{} det factors for {k} points", d.len()))),
        None => vec![t * t * (diag.alpha * gamma + diag.beta.norm_sqr()) / (eta * eta); k],
    };
    let pi = std::f64::consts::PI;
    let log_b = (1..=k)
        .map(|i| -t.ln() + 0.5 * (nf / (std::f64::consts::TAU * t)).ln() + (nf - i as f64) * (nf / (pi * t)).ln())
        .collect();
    let log_d =
        -kf * pi.ln() + 0.5 * kf * (nf * t / std::f64::consts::TAU).ln() + (nf - kf).powi(2) * (nf / (pi * t)).ln();
    let log_f = 0.5 * kf * kf * nf.ln()
        - 0.5 * kf * std::f64::consts::LN_2
        - kf * (kf + 1.5) * pi.ln()
        - kf * (kf - 0.5) * t.ln()
        - 0.5 * kf * (kf + 1.0) * sigma.ln();
    let rho = ginibre_kernel(z_offsets)?.determinant;
    let mut log_f_pred = 0.5 * kf * (t.powi(3) * gamma / (eta * eta)).ln() + rho.ln() - kf * nf * phi;
    for i in 0..k {
        log_f_pred += kf * (eta * eta * dets[i] / (t * t * gamma * sigma)).ln() + psi_values[i].ln();
    }
    let log_k_pred = (0..k)
        .map(|i| {
            0.5 * (eta * eta / (t.powi(3) * gamma)).ln() + nf * phi
                - psi_values[i].ln()
                - dets[..i].iter().map(|d| d.ln()).sum::<f64>()
        })
        .collect();
    Ok(AsymptoticIngredients {
        n,
        k,
        t,
        eta_star: eta,
        diagnostics: diag,
        psi_values,
        log_b,
        log_d,
        log_f,
        det_factors: dets,
        log_f_pred,
        log_k_pred,
    })
}

/// The φ-free k = 1 combination `F̃(ζ; A⁽¹⁾)·K̃(ζ; A)` at one `v₁`, against
/// `ρ_GinUE(ζ)·η²|det V₁^* G_z V₁|/(t²γσ)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProductCheck {
    pub log_f_tilde: f64,
    pub log_k_tilde: f64,
    pub log_direct: f64,
    pub log_predicted: f64,
    pub ratio: f64,
}

/// `v₁` is drawn from the Gaussian approximation of `ν₁` (normalized `CN(0, Q^{-1})`).
pub fn product_check_k1(a: &ComplexMatrix, z: C64, t: f64, zeta: C64, seed: u64) -> Result<ProductCheck> {
    let n = a.rows();
    let nf = n as f64;
    let f = factorize(a, z)?;
    let eta = solve_eta_star(&f, t)?.eta_star;
    let diag = diagnostics(&f, eta, Some(t))?;
    let sigma = diag.sigma;
    let w = z + zeta / (nf * sigma).sqrt();

    let measure = TiltedSphereMeasure::new(a, w, eta, t, n)?;
    let mut rng = stream(seed, 0, streams::SPHERE);
    let mut y: Vec<C64> = measure.q.iter().map(|q| complex_normal(&mut rng, 1.0) / q.sqrt()).collect();
    crate::linalg::normalize(&mut y);
    let v1 = measure.eigen_basis.matvec(&y);
    let chain = project_chain(a, &[v1.clone()])?;

    let pi = std::f64::consts::PI;
    let e_det = expected_abs_det_sq(&chain.a_matrices[1], w, t, n)?;
    let log_f_tilde = -(nf * sigma).ln() - pi.ln() + 0.5 * (nf * t / std::f64::consts::TAU).ln() + e_det.ln();
    let log_k_tilde = k_contour_saddle(a, w, t, n)?.log_value;
    let log_direct = log_f_tilde + log_k_tilde;
    let rho = ginibre_kernel(&[zeta])?.determinant;
    let log_predicted = rho.ln() + (eta * eta * det_form_value(&f, eta, &v1) / (t * t * diag.gamma * sigma)).ln();
    Ok(ProductCheck { log_f_tilde, log_k_tilde, log_direct, log_predicted, ratio: (log_direct - log_predicted).exp() })
}
