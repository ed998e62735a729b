//! `E|det(A + B − z)|²` for `B` with iid complex Gaussian entries of variance `t/N`, two ways:
//! Monte Carlo over `B`, and the dual integral over one complex variable
//! `(N/πt) ∫_ℂ e^{−N|x|²/t} det[[x, i(A − z)], [i(A − z)^*, x̄]] d²x`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, singular_values, ComplexMatrix, C64};
use crate::quadrature::{integrate_with_breaks, periodic_trapezoid, QuadOptions};
use crate::rng::{gaussian_matrix, stream, streams};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DualityCheck {
    pub gaussian_mc: f64,
    pub mc_stderr: f64,
    pub dual_integral: f64,
    pub quad_error: f64,
    /// `Σ_k k! (t/N)^k e_{n−k}(s²)` from the singular values of `A − z`.
    pub closed_form: f64,
    /// `|det(A − z)|²`.
    pub deterministic: f64,
}

/// Angular nodes for the dual integral; the integrand is independent of `arg x`.
const ANGULAR_NODES: usize = 8;

/// Elementary symmetric polynomials `e_0..e_n` of `x`.
fn elementary_symmetric(x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; x.len() + 1];
    e[0] = 1.0;
    for (j, xi) in x.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            e[k] += e[k - 1] * xi;
        }
    }
    e
}

/// Closed form of `E|det(A + B − z)|²` with entry variance `t/N`.
pub fn expected_abs_det_sq(a: &ComplexMatrix, z: C64, t: f64, n_global: usize) -> Result<f64> {
    let s2: Vec<f64> = singular_values(&a.shifted(z))?.iter().map(|s| s * s).collect();
    let n = s2.len();
    let e = elementary_symmetric(&s2);
    let tau = t / n_global as f64;
    let mut term = 1.0; // k! τ^k
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            term *= k as f64 * tau;
        }
        total += term * e[n - k];
    }
    Ok(total)
}

fn dual_matrix(y: &ComplexMatrix, x: C64) -> ComplexMatrix {
    let n = y.rows();
    let i = C64::new(0.0, 1.0);
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(k, k)] = x;
        m[(n + k, n + k)] = x.conj();
    }
    m.set_block(0, n, &y.scale(i));
    m.set_block(n, 0, &y.adjoint().scale(i));
    m
}

pub fn char_poly_duality_k1(
    a: &ComplexMatrix,
    z: C64,
    t: f64,
    n_global: usize,
    samples: usize,
    seed: u64,
) -> Result<DualityCheck> {
    let n = a.rows();
    if !a.is_square() || n == 0 || n > n_global {
        return Err(Error::InvalidInput("A must be square with 1 ≤ dimension ≤ N".into()));
    }
    if !(t > 0.0) || samples < 2 {
        return Err(Error::InvalidInput("need t > 0 and at least two samples".into()));
    }
    let y = a.shifted(z);
    let var = t / n_global as f64;

    let vals: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let b = gaussian_matrix(&mut stream(seed, s, streams::NOISE_B), n, var);
            Ok(det(&(&y + &b))?.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let m = vals.iter().sum::<f64>() / samples as f64;
    let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (samples as f64 - 1.0);

    // Polar coordinates: ∫ ρ dρ ∫ dθ, trapezoid in θ, Gauss–Kronrod in ρ up to where
    // e^{−Nρ²/t}(ρ² + ‖A − z‖²)^n is negligible.
    let scale = 1.0 / var;
    let ynorm2 = y.norm_fro().powi(2);
    let weight = |rho: f64| (-scale * rho * rho).exp() * (rho * rho + ynorm2).powi(n as i32) * rho;
    let peak =
        (0..200).map(|j| weight((j as f64 + 0.5) * 0.05 * var.sqrt() * (n as f64 + 1.0).sqrt())).fold(0.0, f64::max);
    let mut r_max = var.sqrt();
    while weight(r_max) > 1e-18 * peak {
        r_max *= 1.25;
    }
    let radial = |rho: f64| {
        let ang = periodic_trapezoid(
            |th| match det(&dual_matrix(&y, C64::from_polar(rho, th))) {
                Ok(d) => d,
                Err(_) => C64::new(f64::NAN, 0.0),
            },
            std::f64::consts::TAU,
            ANGULAR_NODES,
        );
        ang * ((-scale * rho * rho).exp() * rho)
    };
    let breaks: Vec<f64> = (1..16).map(|j| r_max * j as f64 / 16.0).collect();
    let opts = QuadOptions { abs_tol: 1e-200, rel_tol: 1e-12, max_intervals: 5_000 };
    let q = integrate_with_breaks(radial, 0.0, r_max, &breaks, opts)?;
    if !q.value.re.is_finite() {
        return Err(Error::Numerical("dual integrand is not finite".into()));
    }
    let norm = scale / std::f64::consts::PI;
    Ok(DualityCheck {
        gaussian_mc: m,
        mc_stderr: (v / samples as f64).sqrt(),
        dual_integral: norm * q.value.re,
        quad_error: norm * q.error + norm * q.value.im.abs(),
        closed_form: expected_abs_det_sq(a, z, t, n_global)?,
        deterministic: det(&y)?.norm_sqr(),
    })
}
