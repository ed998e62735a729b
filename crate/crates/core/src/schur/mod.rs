//! Partial Schur decomposition `M = T(z₁, v₁, w₁, …, z_k, v_k, w_k, M⁽ᵏ⁾)`, one Householder
//! step at a time: `T_i(z, v, w, M') = R(v) [[z, w^*], [0, M']] R(v)`.

mod kpoint;
mod projected;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eig::sort_lexicographic;
use crate::linalg::{det, dotc, normalize, schur_decomposition, ComplexMatrix, HouseholderReflector, Lu, C64};

pub use kpoint::{kpoint_identity_mc, KPointEstimate, KPointOptions};
pub use projected::{project_chain, ProjectedMatrixChain};

/// Eigenvalues closer than this (relative to `max(1, ‖M‖_max)`) are treated as repeated.
pub const DEGENERATE_GAP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurChain {
    pub n: usize,
    pub k: usize,
    pub z_list: Vec<C64>,
    /// `v_i ∈ ℂ^{N−i+1}`, unit norm, first entry real and ≥ 0.
    pub v_list: Vec<Vec<C64>>,
    /// `w_i ∈ ℂ^{N−i}`.
    pub w_list: Vec<Vec<C64>>,
    /// `M⁽ᵏ⁾`, of dimension `N − k`.
    pub m_k: ComplexMatrix,
}

impl SchurChain {
    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n, self.k);
        if k > n || self.z_list.len() != k || self.v_list.len() != k || self.w_list.len() != k {
            return Err(Error::DimensionMismatch(format!("chain with N = {n}, k = {k} has inconsistent list lengths")));
        }
        if self.m_k.shape() != (n - k, n - k) {
            return Err(Error::DimensionMismatch(format!(
                "M⁽ᵏ⁾ is {}x{}, expected {}",
                self.m_k.rows(),
                self.m_k.cols(),
                n - k
            )));
        }
        for i in 0..k {
            if self.v_list[i].len() != n - i || self.w_list[i].len() != n - i - 1 {
                return Err(Error::DimensionMismatch(format!("v_{} or w_{} has the wrong length", i + 1, i + 1)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// Rotates `v` so its first entry is real and nonnegative.
pub fn fix_phase(v: &mut [C64]) {
    let a = v[0].norm();
    if a > 0.0 {
        let ph = v[0].conj() / a;
        v.iter_mut().for_each(|x| *x *= ph);
        v[0] = C64::new(v[0].re, 0.0);
    }
}

/// `R(v) [[z, w^*], [0, M]] R(v)`.
pub fn schur_step_forward(z: C64, v: &[C64], w: &[C64], m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = v.len();
    if n == 0 || w.len() + 1 != n || m.shape() != (n - 1, n - 1) {
        return Err(Error::DimensionMismatch(format!(
            "v has length {n}, w has length {}, M is {}x{}",
            w.len(),
            m.rows(),
            m.cols()
        )));
    }
    let mut t = ComplexMatrix::zeros(n, n);
    t[(0, 0)] = z;
    for (j, wj) in w.iter().enumerate() {
        t[(0, j + 1)] = wj.conj();
    }
    t.set_block(1, 1, m);
    let r = HouseholderReflector::new(v)?;
    Ok(r.conjugate(&t))
}

/// One inverse step for the eigenvalue at `index` in the (Re, Im)-sorted spectrum.
/// Returns `(z, v, w, M')`.
pub fn schur_step_inverse(m: &ComplexMatrix, index: usize) -> Result<(C64, Vec<C64>, Vec<C64>, ComplexMatrix)> {
    let n = m.rows();
    if !m.is_square() || n == 0 {
        return Err(Error::InvalidInput("expected a nonempty square matrix".into()));
    }
    if index >= n {
        return Err(Error::InvalidInput(format!("eigenvalue index {index} out of range for dimension {n}")));
    }
    let schur = schur_decomposition(m)?;
    let eigs = schur.eigenvalues();
    let mut sorted = eigs.clone();
    sort_lexicographic(&mut sorted);
    let scale = m.norm_max().max(1.0);
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((eigs[i] - eigs[j]).norm());
        }
    }
    if gap < DEGENERATE_GAP_TOL * scale {
        return Err(Error::Degenerate { gap, tol: DEGENERATE_GAP_TOL * scale });
    }
    let target = sorted[index];
    let p = (0..n).min_by(|&a, &b| (eigs[a] - target).norm().total_cmp(&(eigs[b] - target).norm())).expect("n > 0");
    let mut v = schur.eigenvector(p);
    normalize(&mut v);
    fix_phase(&mut v);
    let r = HouseholderReflector::new(&v)?;
    let rmr = r.conjugate(m);
    let z = rmr[(0, 0)];
    // [0; w] = R (1 − v v^*) M^* v.
    let mut mv = m.adjoint_matvec(&v);
    let p = dotc(&v, &mv);
    for (x, vi) in mv.iter_mut().zip(&v) {
        *x -= p * vi;
    }
    r.apply_vec(&mut mv);
    let w = mv[1..].to_vec();
    let small = rmr.submatrix(1, 1, n - 1, n - 1);
    Ok((z, v, w, small))
}

/// Applies `k` inverse steps, selecting `selection[i]` at step `i`.
pub fn decompose(m: &ComplexMatrix, selection: &[usize]) -> Result<SchurChain> {
    let n = m.rows();
    if selection.len() > n {
        return Err(Error::InvalidInput(format!("{} selections for dimension {n}", selection.len())));
    }
    let mut cur = m.clone();
    let (mut zs, mut vs, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for &idx in selection {
        let (z, v, w, next) = schur_step_inverse(&cur, idx)?;
        zs.push(z);
        vs.push(v);
        ws.push(w);
        cur = next;
    }
    Ok(SchurChain { n, k: selection.len(), z_list: zs, v_list: vs, w_list: ws, m_k: cur })
}

/// `T(chain)`: forward steps from `M⁽ᵏ⁾` up to dimension `N`.
pub fn assemble(chain: &SchurChain) -> Result<ComplexMatrix> {
    chain.validate()?;
    let mut cur = chain.m_k.clone();
    for i in (0..chain.k).rev() {
        cur = schur_step_forward(chain.z_list[i], &chain.v_list[i], &chain.w_list[i], &cur)?;
    }
    Ok(cur)
}

/// `|Δ(z)|² ∏_i |det(z_i − M⁽ᵏ⁾)|²`.
pub fn jacobian(chain: &SchurChain) -> Result<f64> {
    chain.validate()?;
    jacobian_formula(&chain.z_list, &chain.m_k)
}

pub fn jacobian_formula(z: &[C64], m: &ComplexMatrix) -> Result<f64> {
    let mut j = 1.0;
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            j *= (z[b] - z[a]).norm_sqr();
        }
    }
    for &zi in z {
        if m.rows() > 0 {
            j *= det(&m.scale(C64::new(-1.0, 0.0)).shifted(-zi))?.norm_sqr();
        }
    }
    Ok(j)
}

/// Real orthonormal basis of `{h : ⟨v, h⟩ = 0}`, the tangent space of the sphere modulo
/// phase at `v`.
fn sphere_chart_basis(v: &[C64]) -> Vec<Vec<C64>> {
    let n = v.len();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let accept = |mut c: Vec<C64>, basis: &mut Vec<Vec<C64>>| {
        for _ in 0..2 {
            let p = dotc(v, &c);
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci -= p * vi;
            }
            // Real Gram–Schmidt against previous directions.
            for b in basis.iter() {
                let p = dotc(b, &c).re;
                for (ci, bi) in c.iter_mut().zip(b) {
                    *ci -= p * bi;
                }
            }
        }
        let nc = crate::linalg::norm2(&c);
        if nc > 1e-6 {
            c.iter_mut().for_each(|x| *x /= nc);
            basis.push(c);
        }
    };
    for e in 0..n {
        for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            if basis.len() == 2 * (n - 1) {
                break;
            }
            let mut c = vec![C64::new(0.0, 0.0); n];
            c[e] = unit;
            accept(c, &mut basis);
        }
    }
    basis
}

/// Jacobian determinant of the chart map by central differences. Coordinates: for each
/// step `(Re z_i, Im z_i)`, the sphere chart of `v_i`, `(Re, Im)` of `w_i`; then the
/// entries of `M⁽ᵏ⁾`. The sphere chart is `v(x) = (v_i + Σ x_j h_j)/‖·‖` with `h_j` a real
/// orthonormal basis orthogonal to `v_i` and `i·v_i`.
pub fn jacobian_finite_difference(chain: &SchurChain, step: f64) -> Result<f64> {
    chain.validate()?;
    let bases: Vec<Vec<Vec<C64>>> = chain.v_list.iter().map(|v| sphere_chart_basis(v)).collect();
    let mut dims = 0;
    for (i, b) in bases.iter().enumerate() {
        dims += 2 + b.len() + 2 * chain.w_list[i].len();
    }
    let mdim = chain.m_k.rows();
    dims += 2 * mdim * mdim;
    let n = chain.n;
    if dims != 2 * n * n {
        return Err(Error::Numerical(format!("chart has {dims} coordinates, expected {}", 2 * n * n)));
    }
    let eval = |x: &[f64]| -> Result<Vec<f64>> {
        let mut c = chain.clone();
        let mut o = 0;
        for i in 0..c.k {
            c.z_list[i] += C64::new(x[o], x[o + 1]);
            o += 2;
            let mut v = chain.v_list[i].clone();
            for h in &bases[i] {
                for (vj, hj) in v.iter_mut().zip(h) {
                    *vj += x[o] * hj;
                }
                o += 1;
            }
            normalize(&mut v);
            c.v_list[i] = v;
            for wj in c.w_list[i].iter_mut() {
                *wj += C64::new(x[o], x[o + 1]);
                o += 2;
            }
        }
        for e in c.m_k.as_mut_slice() {
            *e += C64::new(x[o], x[o + 1]);
            o += 2;
        }
        let m = assemble(&c)?;
        Ok(m.as_slice().iter().flat_map(|z| [z.re, z.im]).collect())
    };
    let mut jac = ComplexMatrix::zeros(dims, dims);
    let mut x = vec![0.0; dims];
    for col in 0..dims {
        x[col] = step;
        let plus = eval(&x)?;
        x[col] = -step;
        let minus = eval(&x)?;
        x[col] = 0.0;
        for (row, (p, q)) in plus.iter().zip(&minus).enumerate() {
            jac[(row, col)] = C64::new((p - q) / (2.0 * step), 0.0);
        }
    }
    Ok(Lu::factor_unchecked(&jac)?.det().norm())
}
