//! Deterministic approximations `M⁽¹⁾`, `M⁽²⁾` of one and two resolvents of the
//! Hermitisation of an iid matrix.
//!
//! `m` solves `−1/m = iη + m − |z|²/(iη + m)`, i.e.
//! `m³ + 2iη m² + (1 − η² − |z|²) m + iη = 0`, with `Im m > 0`.

mod locallaw;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_only, ComplexMatrix, Lu, C64};
use crate::resolvent::BlockOp;

pub use locallaw::{measure_local_law, LocalLawCell, LocalLawEntry, LocalLawResidualReport};

/// A 2×2 matrix of block scalars `[[a, b], [c, d]]` standing for `[[a·1, b·1], [c·1, d·1]]`.
pub type Block2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// `‖T1^{-1}‖` above this is reported as near-critical.
pub const NEAR_CRITICAL_NORM: f64 = 1e14;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SelfConsistentSolution {
    pub z: C64,
    pub eta: f64,
    pub m: C64,
    pub u: C64,
    /// `|−1/m − (iη + m − |z|²/(iη + m))|`.
    pub residual: f64,
}

fn cubic(m: C64, eta: f64, z2: f64) -> (C64, C64) {
    let ie = C64::new(0.0, eta);
    let c1 = C64::new(1.0 - eta * eta - z2, 0.0);
    let p = ((m + 2.0 * ie) * m + c1) * m + ie;
    let dp = (3.0 * m + 4.0 * ie) * m + c1;
    (p, dp)
}

fn equation_residual(m: C64, eta: f64, z2: f64) -> f64 {
    let ie = C64::new(0.0, eta);
    (-ONE / m - (ie + m - z2 / (ie + m))).norm()
}

fn polish(mut m: C64, eta: f64, z2: f64) -> C64 {
    for _ in 0..8 {
        let (p, dp) = cubic(m, eta, z2);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        m -= step;
        if step.norm() <= 1e-17 * m.norm().max(1e-300) {
            break;
        }
    }
    m
}

/// All three roots of the cubic, Newton-polished.
pub fn cubic_roots(z: C64, eta: f64) -> Result<Vec<C64>> {
    let z2 = z.norm_sqr();
    let ie = C64::new(0.0, eta);
    // Companion matrix of m³ + c2 m² + c1 m + c0.
    let (c2, c1, c0) = (2.0 * ie, C64::new(1.0 - eta * eta - z2, 0.0), ie);
    let comp = ComplexMatrix::from_rows(&[vec![-c2, -c1, -c0], vec![ONE, ZERO, ZERO], vec![ZERO, ONE, ZERO]]);
    Ok(eigenvalues_only(&comp)?.into_iter().map(|r| polish(r, eta, z2)).collect())
}

pub fn solve_cubic_m(z: C64, eta: f64) -> Result<SelfConsistentSolution> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput("z must be finite".into()));
    }
    let z2 = z.norm_sqr();
    let roots = cubic_roots(z, eta)?;
    let m = roots
        .iter()
        .copied()
        .filter(|r| r.im > 0.0)
        .min_by(|a, b| equation_residual(*a, eta, z2).total_cmp(&equation_residual(*b, eta, z2)))
        .ok_or_else(|| Error::NoSolution(format!("no root with Im m > 0 among {roots:?}")))?;
    let u = m / (C64::new(0.0, eta) + m);
    Ok(SelfConsistentSolution { z, eta, m, u, residual: equation_residual(m, eta, z2) })
}

/// `[[m, −z u], [−z̄ u, m]]`.
pub fn m1_matrix(sol: &SelfConsistentSolution) -> Block2 {
    [[sol.m, -sol.z * sol.u], [-sol.z.conj() * sol.u, sol.m]]
}

fn mul(a: &Block2, b: &Block2) -> Block2 {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `⟨X⟩ = N^{-1} tr` of the 2N×2N block-scalar matrix.
pub fn block_trace(x: &Block2) -> C64 {
    x[0][0] + x[1][1]
}

pub fn block_op(b: BlockOp) -> Block2 {
    match b {
        BlockOp::Identity => [[ONE, ZERO], [ZERO, ONE]],
        BlockOp::E => [[ZERO, ONE], [ZERO, ZERO]],
        BlockOp::EAdj => [[ZERO, ZERO], [ONE, ZERO]],
    }
}

/// `[[a, b], [c, d]] ↦ (a, d, b, c)`.
fn to_vec4(x: &Block2) -> [C64; 4] {
    [x[0][0], x[1][1], x[0][1], x[1][0]]
}

fn from_vec4(v: &[C64]) -> Block2 {
    [[v[0], v[2]], [v[3], v[1]]]
}

/// The operator `B(η₁, η₂) = 1 − M⁽¹⁾(η₁) S[·] M⁽¹⁾(η₂)` on block-scalar matrices, in the
/// coordinates `(a, d, b, c)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityOperator {
    pub eta1: f64,
    pub eta2: f64,
    pub first: SelfConsistentSolution,
    pub second: SelfConsistentSolution,
    pub t1: Block2,
    pub t2: Block2,
    /// `[[T1⁻¹, 0], [−T2 T1⁻¹, 1]]`, row-major.
    pub b_inverse_4x4: [[C64; 4]; 4],
}

impl StabilityOperator {
    /// `[[T1, 0], [T2, 1]]`, row-major.
    pub fn b_4x4(&self) -> [[C64; 4]; 4] {
        let mut b = [[ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                b[i][j] = self.t1[i][j];
                b[2 + i][j] = self.t2[i][j];
            }
            b[2 + i][2 + i] = ONE;
        }
        b
    }

    pub fn apply_inverse(&self, x: &Block2) -> Block2 {
        let v = to_vec4(x);
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.b_inverse_4x4[i][j] * v[j]).sum();
        }
        from_vec4(&out)
    }

    /// `M⁽²⁾(η₁, η₂; B) = B⁻¹[M⁽¹⁾(η₁) B M⁽¹⁾(η₂)]`.
    pub fn m2(&self, b: &Block2) -> Block2 {
        let rhs = mul(&mul(&m1_matrix(&self.first), b), &m1_matrix(&self.second));
        self.apply_inverse(&rhs)
    }
}

pub fn stability_operator(z: C64, eta1: f64, eta2: f64) -> Result<StabilityOperator> {
    let first = solve_cubic_m(z, eta1)?;
    let second = solve_cubic_m(z, eta2)?;
    let (m1, m2, u1, u2) = (first.m, second.m, first.u, second.u);
    let z2 = z.norm_sqr();
    let diag = ONE - z2 * u1 * u2;
    let t1 = [[diag, -m1 * m2], [-m1 * m2, diag]];
    let t2 = [[z * m2 * u1, z * m1 * u2], [z.conj() * m1 * u2, z.conj() * m2 * u1]];
    let det = t1[0][0] * t1[1][1] - t1[0][1] * t1[1][0];
    let t1i = [[t1[1][1] / det, -t1[0][1] / det], [-t1[1][0] / det, t1[0][0] / det]];
    // Entry bound on the 2×2 inverse: ‖T1⁻¹‖ ≤ 2 max |(T1⁻¹)_ij|.
    let inv_norm = 2.0 * t1i.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    if !(inv_norm <= NEAR_CRITICAL_NORM) {
        return Err(Error::NearCritical(inv_norm));
    }
    let t2t1i = mul(&t2, &t1i);
    let mut binv = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            binv[i][j] = t1i[i][j];
            binv[2 + i][j] = -t2t1i[i][j];
        }
        binv[2 + i][2 + i] = ONE;
    }
    Ok(StabilityOperator { eta1, eta2, first, second, t1, t2, b_inverse_4x4: binv })
}

/// `M⁽²⁾(η₁, η₂; B)` as a block-scalar matrix.
pub fn m2_prediction(z: C64, eta1: f64, eta2: f64, b: BlockOp) -> Result<Block2> {
    Ok(stability_operator(z, eta1, eta2)?.m2(&block_op(b)))
}

/// Predicted `⟨G(η₁) B₁ G(η₂) B₂⟩`.
pub fn predicted_pair_trace(z: C64, first: (f64, BlockOp), second: (f64, BlockOp)) -> Result<C64> {
    let m2 = m2_prediction(z, first.0, second.0, first.1)?;
    Ok(block_trace(&mul(&m2, &block_op(second.1))))
}

/// Predicted `⟨G B⟩`.
pub fn predicted_single_trace(sol: &SelfConsistentSolution, b: BlockOp) -> C64 {
    block_trace(&mul(&m1_matrix(sol), &block_op(b)))
}

/// The resolvent trace family evaluated on `M⁽¹⁾`, `M⁽²⁾` instead of `G`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PredictedDiagnostics {
    pub z: C64,
    pub eta: f64,
    pub m: C64,
    pub g: f64,
    pub alpha: f64,
    pub beta: C64,
    pub gamma: f64,
    pub delta: C64,
    /// `α + |β|²/γ`.
    pub sigma: f64,
    /// `α² + |β|²/γ²`, the variant written in some derivations; kept for comparison.
    pub sigma_alt: f64,
}

pub fn predicted_diagnostics(z: C64, eta: f64) -> Result<PredictedDiagnostics> {
    let op = stability_operator(z, eta, eta)?;
    let m = op.first.m;
    let tr = |b: BlockOp, b2: BlockOp| block_trace(&mul(&op.m2(&block_op(b)), &block_op(b2)));
    let g2 = tr(BlockOp::Identity, BlockOp::Identity);
    let alpha = -tr(BlockOp::E, BlockOp::EAdj);
    let beta = tr(BlockOp::Identity, BlockOp::EAdj) / (2.0 * I);
    let gamma = (2.0 * m - I * eta * g2) / (4.0 * I * eta);
    let delta = tr(BlockOp::EAdj, BlockOp::EAdj);
    let (alpha, gamma) = (alpha.re, gamma.re);
    Ok(PredictedDiagnostics {
        z,
        eta,
        m,
        g: m.im,
        alpha,
        beta,
        gamma,
        delta,
        sigma: alpha + beta.norm_sqr() / gamma,
        sigma_alt: alpha * alpha + beta.norm_sqr() / (gamma * gamma),
    })
}

/// Solves `(1 − M⁽¹⁾(η₁) S[·] M⁽¹⁾(η₂)) X = M⁽¹⁾(η₁) B M⁽¹⁾(η₂)` by assembling the operator
/// on the basis of block-scalar matrices and an LU solve; independent of `T1`, `T2`.
pub fn m2_brute_force(z: C64, eta1: f64, eta2: f64, b: BlockOp) -> Result<Block2> {
    let s1 = m1_matrix(&solve_cubic_m(z, eta1)?);
    let s2 = m1_matrix(&solve_cubic_m(z, eta2)?);
    let s = |x: &Block2| -> Block2 { [[x[1][1], ZERO], [ZERO, x[0][0]]] };
    let op = |x: &Block2| -> Block2 {
        let y = mul(&mul(&s1, &s(x)), &s2);
        [[x[0][0] - y[0][0], x[0][1] - y[0][1]], [x[1][0] - y[1][0], x[1][1] - y[1][1]]]
    };
    // Column (2i + j) is the image of the unit matrix at (i, j); entries flattened the same way.
    let mat = ComplexMatrix::from_fn(4, 4, |r, c| {
        let mut e = [[ZERO; 2]; 2];
        e[c / 2][c % 2] = ONE;
        op(&e)[r / 2][r % 2]
    });
    let rhs = mul(&mul(&s1, &block_op(b)), &s2);
    let x = Lu::new(&mat)?.solve_vec(&[rhs[0][0], rhs[0][1], rhs[1][0], rhs[1][1]]);
    Ok([[x[0], x[1]], [x[2], x[3]]])
}
