use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fourier_line;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature::QuadOptions;
use crate::rng::{stream, streams, uniform_sphere};

/// Regularization `f = e^{a} e^{-a‖u‖²} f` on the sphere, for `f` that is not integrable on ℂᴺ.
pub const REGULARIZATION_A: f64 = 2.0;

/// `|f̂(x)| ≤ constant·|x|^{-power}` for large `|x|`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TransformDecay {
    pub power: f64,
    pub constant: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SphereReduction {
    pub value: C64,
    pub error: f64,
    pub cutoff: f64,
}

/// log of the surface measure of the unit sphere in ℂⁿ, `2πⁿ/(n−1)!`.
pub fn ln_sphere_volume(n: usize) -> f64 {
    let ln_fact: f64 = (1..n).map(|j| (j as f64).ln()).sum();
    std::f64::consts::LN_2 + n as f64 * std::f64::consts::PI.ln() - ln_fact
}

/// `∫ e^{ix} f̂(x) dx` with `f̂(x) = (1/π)∫_{ℂᴺ} e^{-ix‖u‖²} f(u) du`; this is the integral
/// of `f` over the unit sphere of ℂᴺ against the unnormalized surface measure.
pub fn sphere_integral_reduce<F: Fn(f64) -> C64>(f_hat: F, decay: TransformDecay, tol: f64) -> Result<SphereReduction> {
    if !(decay.power > 0.0) || !(decay.constant > 0.0) {
        return Err(Error::Divergence(format!("transform decay power {} gives no convergence", decay.power)));
    }
    // After two integration-by-parts terms the tail error is ~ C p(p+1) X^{-p-2}.
    let cutoff = ((decay.power + 1.0) * decay.power * decay.constant / tol).powf(1.0 / (decay.power + 2.0)).max(50.0);
    let at_cut = f_hat(cutoff).norm().max(f_hat(-cutoff).norm());
    if !at_cut.is_finite() || at_cut > 2.0 * decay.constant * cutoff.powf(-decay.power) {
        return Err(Error::Divergence(format!("|f̂({cutoff:.3e})| = {at_cut:e} violates the declared decay bound")));
    }
    let opts = QuadOptions { abs_tol: 0.1 * tol, rel_tol: 1e-13, max_intervals: 200_000 };
    let (value, error) = fourier_line(f_hat, 1.0, cutoff, opts)?;
    Ok(SphereReduction { value, error, cutoff })
}

/// `∫_{S} e^{-u^* B u} dS` for Hermitian PSD `B` with eigenvalues `b`, through the regularized
/// transform `f̂_a(x) = π^{N−1} ∏ (b_k + a + ix)^{-1}`.
pub fn quadratic_form_sphere_integral(b: &[f64], tol: f64) -> Result<SphereReduction> {
    if b.is_empty() || b.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidInput("eigenvalues must be nonnegative".into()));
    }
    let n = b.len();
    let a = REGULARIZATION_A;
    let pref = std::f64::consts::PI.powi(n as i32 - 1);
    let f_hat = |x: f64| b.iter().fold(C64::new(pref, 0.0), |acc, bk| acc / C64::new(bk + a, x));
    let mut r = sphere_integral_reduce(f_hat, TransformDecay { power: n as f64, constant: pref }, tol * (-a).exp())?;
    r.value *= a.exp();
    r.error *= a.exp();
    Ok(r)
}

/// Surface measure times the uniform-sphere average of `f`, with its standard error.
pub fn sphere_integral_mc<F: Fn(&[C64]) -> f64 + Sync>(f: F, n: usize, samples: usize, seed: u64) -> (f64, f64) {
    let vals: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let v = uniform_sphere(&mut stream(seed, s, streams::SPHERE), n);
            f(&v)
        })
        .collect();
    let m = vals.iter().sum::<f64>() / samples as f64;
    let var = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (samples as f64 - 1.0).max(1.0);
    let vol = ln_sphere_volume(n).exp();
    (vol * m, vol * (var / samples as f64).sqrt())
}
