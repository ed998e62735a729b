//! Integral identities behind the k-point formula: the sphere-integral reduction, the
//! one-dimensional contour formula for the tilted sphere normalizer `K̃`, quadratic forms
//! under the tilted sphere measure `ν`, the k = 1 characteristic-polynomial duality and
//! the leading-order predictors for `F̃` and `K̃`.

mod asymptotics;
mod duality;
mod kformula;
mod nu;
mod sphere;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature::{integrate_with_breaks, QuadOptions};

pub use asymptotics::{asymptotic_predictors, det_form_value, product_check_k1, AsymptoticIngredients, ProductCheck};
pub use duality::{char_poly_duality_k1, expected_abs_det_sq, DualityCheck};
pub use kformula::{k_contour_formula, k_contour_saddle, k_direct_mc, KContour, TiltedSphereMeasure};
pub use nu::{nu_expectation, nu_targets, NuEstimate, NuStatistic, NuTargets, ESS_MIN, ESS_WARN};
pub use sphere::{
    ln_sphere_volume, quadratic_form_sphere_integral, sphere_integral_mc, sphere_integral_reduce, SphereReduction,
    TransformDecay, REGULARIZATION_A,
};

/// One line of a verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub parameters: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    /// Combined standard error for Monte-Carlo comparisons, otherwise the absolute tolerance.
    pub stderr: f64,
    pub pass: bool,
}

/// `∫_{-∞}^{∞} e^{iωx} g(x) dx`, by Gauss–Kronrod on `[-cut, cut]` plus a two-term
/// integration-by-parts expansion of both tails. Returns (value, error estimate).
pub(crate) fn fourier_line<F: Fn(f64) -> C64>(g: F, omega: f64, cut: f64, opts: QuadOptions) -> Result<(C64, f64)> {
    if !(omega > 0.0 && cut > 0.0) {
        return Err(Error::InvalidInput("frequency and cutoff must be positive".into()));
    }
    let i = C64::new(0.0, 1.0);
    let integrand = |x: f64| (i * omega * x).exp() * g(x);
    let period = std::f64::consts::TAU / omega;
    let panels = ((2.0 * cut / period).ceil() as usize).clamp(2, 4096);
    let breaks: Vec<f64> = (1..panels).map(|j| -cut + 2.0 * cut * j as f64 / panels as f64).collect();
    let body = integrate_with_breaks(integrand, -cut, cut, &breaks, opts)?;
    let h = 1e-4 * cut;
    let d1 = |x: f64| (g(x + h) - g(x - h)) / (2.0 * h);
    let d2 = |x: f64| (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
    let (eu, el) = ((i * omega * cut).exp(), (-i * omega * cut).exp());
    let upper = eu * (i * g(cut) / omega - d1(cut) / (omega * omega));
    let lower = el * (-i * g(-cut) / omega + d1(-cut) / (omega * omega));
    let next = (d2(cut).norm() + d2(-cut).norm()) / omega.powi(3);
    Ok((body.value + upper + lower, body.error + next))
}
