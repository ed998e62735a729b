//! Quadratic forms under the tilted sphere measure `ν`, by importance sampling with an
//! angular central Gaussian proposal `v = x/‖x‖`, `x ~ CN(0, Q^{-1})`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TiltedSphereMeasure;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::resolvent::diagnostics;
use crate::rng::{complex_normal, stream, streams};

/// Below this effective sample size the estimate is rejected.
pub const ESS_MIN: f64 = 10.0;
/// Below this effective sample size a warning is attached.
pub const ESS_WARN: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuStatistic {
    /// `η v^* H v`.
    AlphaForm,
    /// `v^* H (A − w) v`.
    BetaForm,
    /// `η v^* H̃ v`.
    GammaForm,
    /// `|det V^* G V| = η²(v^*Hv)(v^*H̃v) + |v^*H(A − w)v|²` with `V = 1₂ ⊗ v`.
    DetForm,
}

/// Trace targets with `⟨·⟩ = N^{-1} tr` for the global `N`:
/// `α̃ = η²⟨H̃H⟩`, `β̃ = η⟨H²(A − w)⟩`, `γ̃ = η²⟨H²⟩`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NuTargets {
    pub alpha: f64,
    pub beta: C64,
    pub gamma: f64,
}

pub fn nu_targets(m: &TiltedSphereMeasure) -> Result<NuTargets> {
    let d = diagnostics(&m.factorization, m.eta, None)?;
    let r = m.dim() as f64 / m.n_global as f64;
    Ok(NuTargets { alpha: d.alpha * r, beta: d.beta * r, gamma: d.gamma * r })
}

impl NuTargets {
    /// Concentration value of `stat` under `ν`.
    pub fn expected(&self, stat: NuStatistic, eta: f64, t: f64) -> C64 {
        match stat {
            NuStatistic::AlphaForm => C64::new(t / eta * self.alpha, 0.0),
            NuStatistic::BetaForm => self.beta * (t / eta),
            NuStatistic::GammaForm => C64::new(t / eta * self.gamma, 0.0),
            NuStatistic::DetForm => {
                C64::new(t * t * (self.alpha * self.gamma + self.beta.norm_sqr()) / (eta * eta), 0.0)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NuEstimate {
    pub statistic: NuStatistic,
    pub mean: C64,
    /// Delta-method standard error of the self-normalized estimate (modulus of the complex error).
    pub stderr: f64,
    pub ess: f64,
    pub samples: usize,
    pub target: C64,
    pub warnings: Vec<String>,
}

pub fn nu_expectation(
    a_proj: &ComplexMatrix,
    w: C64,
    eta: f64,
    t: f64,
    n_global: usize,
    statistic: NuStatistic,
    samples: usize,
    seed: u64,
) -> Result<NuEstimate> {
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let m = TiltedSphereMeasure::new(a_proj, w, eta, t, n_global)?;
    let f = &m.factorization;
    let n = m.dim();
    let scale = n_global as f64 / t;
    let d: Vec<f64> = f.s.iter().map(|s| 1.0 / (eta * eta + s * s)).collect();
    let sd: Vec<f64> = m.q.iter().map(|q| q.sqrt().recip()).collect();
    let w_adj = f.w.adjoint();

    // (log weight, statistic) per draw; y = V^* v are the coordinates of v.
    let draws: Vec<(f64, C64)> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, s, streams::SPHERE);
            let mut y: Vec<C64> = sd.iter().map(|sdi| complex_normal(&mut rng, 1.0) * sdi).collect();
            let norm = crate::linalg::normalize(&mut y);
            debug_assert!(norm > 0.0);
            let quad_s: f64 = y.iter().zip(&f.s).map(|(yi, si)| si * si * yi.norm_sqr()).sum();
            let quad_q: f64 = y.iter().zip(&m.q).map(|(yi, qi)| qi * yi.norm_sqr()).sum();
            // Target exp(−(N/t) v^*|A−w|² v) over the proposal density ∝ (v^* Q v)^{-n}.
            let log_w = -scale * quad_s + n as f64 * quad_q.ln();
            let uy = w_adj.matvec(&y); // U^* v
            let hv: f64 = uy.iter().zip(&d).map(|(c, di)| di * c.norm_sqr()).sum();
            let htv: f64 = y.iter().zip(&d).map(|(c, di)| di * c.norm_sqr()).sum();
            let cross: C64 =
                uy.iter().zip(&y).zip(d.iter().zip(&f.s)).map(|((u, v), (di, si))| u.conj() * v * (di * si)).sum();
            let val = match statistic {
                NuStatistic::AlphaForm => C64::new(eta * hv, 0.0),
                NuStatistic::GammaForm => C64::new(eta * htv, 0.0),
                NuStatistic::BetaForm => cross,
                NuStatistic::DetForm => C64::new(eta * eta * hv * htv + cross.norm_sqr(), 0.0),
            };
            (log_w, val)
        })
        .collect();
    let lmax = draws.iter().map(|d| d.0).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = draws.iter().map(|d| (d.0 - lmax).exp()).collect();
    let sw: f64 = weights.iter().sum();
    let sw2: f64 = weights.iter().map(|x| x * x).sum();
    let ess = sw * sw / sw2;
    if ess < ESS_MIN {
        return Err(Error::LowEss { ess, min: ESS_MIN });
    }
    let mean: C64 = draws.iter().zip(&weights).map(|(d, wi)| d.1 * wi).sum::<C64>() / sw;
    let var: f64 = draws.iter().zip(&weights).map(|(d, wi)| wi * wi * (d.1 - mean).norm_sqr()).sum::<f64>();
    let stderr = var.sqrt() / sw;
    let mut warnings = Vec::new();
    if ess < ESS_WARN {
        warnings.push(format!("effective sample size {ess:.1} is below {ESS_WARN}"));
    }
    let target = nu_targets(&m)?.expected(statistic, eta, t);
    Ok(NuEstimate { statistic, mean, stderr, ess, samples, target, warnings })
}
