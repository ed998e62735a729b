//! Numerical checks of exact identities built on the Hermitisation.

use serde::{Deserialize, Serialize};

use super::{factorize, hermitise};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_only, eigh, inverse, operator_norm, orthonormal_complement, ComplexMatrix, Lu, C64};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

/// Singular values of `A − z` below this make `log|det 𝓗_z|` unusable.
pub const LOGDET_SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogdetCheck {
    /// `log|det 𝓗_z|` from an LU factorization.
    pub lhs: f64,
    /// Right side with the η-integral in closed form.
    pub rhs_closed_form: f64,
    /// Right side with the η-integral by adaptive quadrature.
    pub rhs_quadrature: f64,
    pub quadrature_error: f64,
    /// Largest of the two |LHS − RHS|.
    pub residual: f64,
}

/// `log|det 𝓗_z| = log|det(𝓗_z − iT)| − Im ∫_0^T tr G_z(η) dη`.
pub fn logdet_identity_check(a: &ComplexMatrix, z: C64, t_cut: f64) -> Result<LogdetCheck> {
    if !(t_cut > 0.0 && t_cut.is_finite()) {
        return Err(Error::InvalidInput(format!("cutoff must be positive, got {t_cut}")));
    }
    let f = factorize(a, z)?;
    if let Some((idx, &s)) = f.s.iter().enumerate().find(|(_, &s)| s < LOGDET_SINGULAR_TOL) {
        return Err(Error::Singular { pivot: idx, magnitude: s });
    }
    let h = hermitise(a, z);
    let lhs = Lu::new(&h)?.log_abs_det();
    let shifted = Lu::factor_unchecked(&h.shifted(C64::new(0.0, t_cut)))?.log_abs_det();

    let t2 = t_cut * t_cut;
    let closed: f64 = f.s.iter().map(|s| ((t2 + s * s) / (s * s)).ln()).sum();

    // Im tr G(η) = Σ 2η/(η² + s²), peaked at η ~ s.
    let s = f.s.clone();
    let q = integrate_with_breaks(
        |eta| C64::new(s.iter().map(|si| 2.0 * eta / (eta * eta + si * si)).sum(), 0.0),
        0.0,
        t_cut,
        &f.s,
        QuadOptions { abs_tol: 1e-13, rel_tol: 1e-14, max_intervals: 50_000 },
    )?;
    let rhs_closed_form = shifted - closed;
    let rhs_quadrature = shifted - q.value.re;
    let residual = (lhs - rhs_closed_form).abs().max((lhs - rhs_quadrature).abs());
    Ok(LogdetCheck { lhs, rhs_closed_form, rhs_quadrature, quadrature_error: q.error, residual })
}

/// Smooth test function on ℂ supported in a disk.
pub trait TestFunction {
    fn value(&self, z: C64) -> f64;
    /// `(center, radius)` of a disk outside which the function vanishes (or is negligible).
    fn support(&self) -> (C64, f64);
}

/// `exp(1 − 1/(1 − |z − c|²/R²))` inside the disk, 0 outside; `f(c) = 1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RadialBump {
    pub center: C64,
    pub radius: f64,
}

impl TestFunction for RadialBump {
    fn value(&self, z: C64) -> f64 {
        let r2 = (z - self.center).norm_sqr() / (self.radius * self.radius);
        if r2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }
    fn support(&self) -> (C64, f64) {
        (self.center, self.radius)
    }
}

/// `exp(−|z − c|²/(2w²))`, truncated at `cutoff · w`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: C64,
    pub width: f64,
    pub cutoff: f64,
}

impl GaussianBump {
    pub fn new(center: C64, width: f64) -> Self {
        Self { center, width, cutoff: 8.0 }
    }
}

impl TestFunction for GaussianBump {
    fn value(&self, z: C64) -> f64 {
        let d2 = (z - self.center).norm_sqr();
        if d2 >= (self.cutoff * self.width).powi(2) {
            0.0
        } else {
            (-d2 / (2.0 * self.width * self.width)).exp()
        }
    }
    fn support(&self) -> (C64, f64) {
        (self.center, self.cutoff * self.width)
    }
}

/// Cell-centered square grid covering the support of the test function.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GirkoGrid {
    pub cells_per_side: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GirkoCheck {
    /// `Σ f(λ_n)`.
    pub lhs: f64,
    /// `(1/4π) ∫ Δf · log|det 𝓗_z| d²z`.
    pub rhs: f64,
    pub residual: f64,
    pub cell: f64,
    /// An eigenvalue sits within two cells of the support boundary.
    pub boundary_warning: bool,
}

/// Compares `Σ f(λ_n(A))` with `(1/4π) ∫ Δf(z) log|det 𝓗_z| d²z`.
pub fn girko_check<F: TestFunction + ?Sized>(a: &ComplexMatrix, f: &F, grid: GirkoGrid) -> Result<GirkoCheck> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::InvalidInput("expected a nonempty square matrix".into()));
    }
    let m = grid.cells_per_side;
    if m < 4 {
        return Err(Error::InvalidInput(format!("grid needs at least 4 cells per side, got {m}")));
    }
    let (c, r) = f.support();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("support radius must be positive, got {r}")));
    }
    let eigs = eigenvalues_only(a)?;
    let lhs: f64 = eigs.iter().map(|&l| f.value(l)).sum();

    let h = 2.0 * r / m as f64;
    let boundary_warning = eigs.iter().any(|&l| ((l - c).norm() - r).abs() < 2.0 * h);
    // Two extra cells on each side so the stencil sees the whole support.
    let total = m + 4;
    let x0 = c.re - r - 2.0 * h;
    let y0 = c.im - r - 2.0 * h;
    let mut acc = 0.0;
    for j in 0..total {
        for i in 0..total {
            let z = C64::new(x0 + (i as f64 + 0.5) * h, y0 + (j as f64 + 0.5) * h);
            let lap = (f.value(z + h) + f.value(z - h) + f.value(z + C64::new(0.0, h)) + f.value(z - C64::new(0.0, h))
                - 4.0 * f.value(z))
                / (h * h);
            if lap == 0.0 {
                continue;
            }
            let ld = Lu::factor_unchecked(&hermitise(a, z))?.log_abs_det();
            let ld = if ld.is_finite() { ld } else { f64::MIN_POSITIVE.ln() };
            acc += lap * ld;
        }
    }
    let rhs = acc * h * h / (4.0 * std::f64::consts::PI);
    Ok(GirkoCheck { lhs, rhs, residual: (lhs - rhs).abs(), cell: h, boundary_warning })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MinorCheck {
    /// Max-entry difference of `U diag(0, B^{-1}) U^*` and
    /// `A^{-1} − A^{-1}U_k(U_k^* A^{-1} U_k)^{-1}U_k^* A^{-1}`.
    pub residual: f64,
    /// `‖A^{-1}U_k(U_k^* A^{-1} U_k)^{-1}U_k^* A^{-1}‖`.
    pub correction_norm: f64,
    /// `‖(Re A)^{-1}‖` if `Re A > 0`, else `‖(Im A)^{-1}‖` if `Im A > 0`.
    pub norm_bound: Option<f64>,
    pub bound_holds: Option<bool>,
}

/// Resolvent of the compression of `A` to the complement of `U_k`.
pub fn minor_resolvent_check(a: &ComplexMatrix, u_k: &ComplexMatrix) -> Result<MinorCheck> {
    let n = a.rows();
    if !a.is_square() || u_k.rows() != n || u_k.cols() == 0 || u_k.cols() >= n {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, frame is {}x{}",
            a.rows(),
            a.cols(),
            u_k.rows(),
            u_k.cols()
        )));
    }
    let rest = orthonormal_complement(u_k)?;
    let ainv = inverse(a)?;
    let b = rest.adjoint_matmul(&a.matmul(&rest));
    let binv = inverse(&b)?;
    let lhs = rest.matmul(&binv).matmul(&rest.adjoint());

    let ainv_u = ainv.matmul(u_k);
    let u_ainv = u_k.adjoint_matmul(&ainv);
    let small = u_k.adjoint_matmul(&ainv_u);
    let small_inv = inverse(&small)?;
    let correction = ainv_u.matmul(&small_inv).matmul(&u_ainv);
    let rhs = &ainv - &correction;
    let residual = lhs.max_abs_diff(&rhs);
    let correction_norm = operator_norm(&correction)?;

    let half = |m: &ComplexMatrix| m.scale(C64::new(0.5, 0.0));
    let re_a = half(&(a + &a.adjoint()));
    let im_a = half(&(a - &a.adjoint())).scale(C64::new(0.0, -1.0));
    let mut norm_bound = None;
    for part in [re_a, im_a] {
        let ev = eigh(&part)?;
        let lo = ev.values[0];
        if lo > 0.0 {
            norm_bound = Some(1.0 / lo);
            break;
        }
    }
    let bound_holds = norm_bound.map(|b| correction_norm <= b * (1.0 + 1e-10));
    Ok(MinorCheck { residual, correction_norm, norm_bound, bound_holds })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FischerCheck {
    pub det: f64,
    pub block_product: f64,
    pub holds: bool,
}

/// `det A ≤ Π det A_nn` for positive semidefinite `A` split into diagonal blocks of the
/// given sizes.
pub fn fischer_check(a: &ComplexMatrix, blocks: &[usize]) -> Result<FischerCheck> {
    if blocks.iter().sum::<usize>() != a.rows() || !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "block sizes {blocks:?} do not tile a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let det = Lu::factor_unchecked(a)?.det().re;
    let mut block_product = 1.0;
    let mut off = 0;
    for &b in blocks {
        block_product *= Lu::factor_unchecked(&a.submatrix(off, off, b, b))?.det().re;
        off += b;
    }
    let holds = det <= block_product * (1.0 + 1e-10) + 1e-300;
    Ok(FischerCheck { det, block_product, holds })
}
