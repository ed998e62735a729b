use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dotc, ComplexMatrix, HouseholderReflector, C64};

/// Successive projections of `A` along the unit vectors `v_1, …, v_k`:
/// `R(v_i) A⁽ⁱ⁻¹⁾ R(v_i) = [[a_i, b_i^*], [c_i, A⁽ⁱ⁾]]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectedMatrixChain {
    /// `A⁽⁰⁾ = A, …, A⁽ᵏ⁾`.
    pub a_matrices: Vec<ComplexMatrix>,
    pub a_list: Vec<C64>,
    pub b_list: Vec<Vec<C64>>,
    pub c_list: Vec<Vec<C64>>,
    pub v_list: Vec<Vec<C64>>,
}

/// `R(v)(1 − v v^*) x` with the leading (zero) entry dropped.
fn project_tail(r: &HouseholderReflector, v: &[C64], mut x: Vec<C64>) -> Vec<C64> {
    let p = dotc(v, &x);
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= p * vi;
    }
    r.apply_vec(&mut x);
    x.remove(0);
    x
}

pub fn project_chain(a: &ComplexMatrix, v_list: &[Vec<C64>]) -> Result<ProjectedMatrixChain> {
    let n = a.rows();
    if !a.is_square() || v_list.len() > n {
        return Err(Error::DimensionMismatch(format!(
            "{} vectors for a {}x{} matrix",
            v_list.len(),
            a.rows(),
            a.cols()
        )));
    }
    let mut out = ProjectedMatrixChain {
        a_matrices: vec![a.clone()],
        a_list: Vec::new(),
        b_list: Vec::new(),
        c_list: Vec::new(),
        v_list: Vec::new(),
    };
    for (i, v) in v_list.iter().enumerate() {
        if v.len() != n - i {
            return Err(Error::DimensionMismatch(format!("v_{} has length {}, expected {}", i + 1, v.len(), n - i)));
        }
        let prev = out.a_matrices.last().expect("nonempty");
        let r = HouseholderReflector::new(v)?;
        // The phase of v is irrelevant for R; align it so R v = e_1 exactly.
        let mut v = v.clone();
        super::fix_phase(&mut v);
        let av = prev.matvec(&v);
        out.a_list.push(dotc(&v, &av));
        out.b_list.push(project_tail(&r, &v, prev.adjoint_matvec(&v)));
        out.c_list.push(project_tail(&r, &v, av));
        let rar = r.conjugate(prev);
        out.a_matrices.push(rar.submatrix(1, 1, n - i - 1, n - i - 1));
        out.v_list.push(v);
    }
    Ok(out)
}

impl ProjectedMatrixChain {
    pub fn k(&self) -> usize {
        self.a_list.len()
    }

    pub fn n(&self) -> usize {
        self.a_matrices[0].rows()
    }

    /// Rebuilds `A⁽⁰⁾` from `(a_i, b_i, c_i, v_i)` and `A⁽ᵏ⁾`.
    pub fn reassemble(&self) -> Result<ComplexMatrix> {
        let mut cur = self.a_matrices[self.k()].clone();
        for i in (0..self.k()).rev() {
            let d = cur.rows() + 1;
            let mut t = ComplexMatrix::zeros(d, d);
            t[(0, 0)] = self.a_list[i];
            for j in 1..d {
                t[(0, j)] = self.b_list[i][j - 1].conj();
                t[(j, 0)] = self.c_list[i][j - 1];
            }
            t.set_block(1, 1, &cur);
            cur = HouseholderReflector::new(&self.v_list[i])?.conjugate(&t);
        }
        Ok(cur)
    }

    /// Max deviation of each stored `A⁽ⁱ⁾` from the recurrence applied to `A⁽ⁱ⁻¹⁾`.
    pub fn recurrence_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.k() {
            let prev = &self.a_matrices[i];
            let d = prev.rows();
            let r = HouseholderReflector::new(&self.v_list[i])?;
            let next = r.conjugate(prev).submatrix(1, 1, d - 1, d - 1);
            worst = worst.max(next.max_abs_diff(&self.a_matrices[i + 1]));
        }
        Ok(worst)
    }

    /// `U = R(v_1) · diag(1, R(v_2)) · … · diag(1_{k−1}, R(v_k))`.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let n = self.n();
        let mut u = ComplexMatrix::identity(n);
        for (i, v) in self.v_list.iter().enumerate() {
            let mut e = ComplexMatrix::identity(n);
            e.set_block(i, i, &HouseholderReflector::new(v)?.to_matrix());
            u = u.matmul(&e);
        }
        Ok(u)
    }

    /// Column `j` of `U^* A U` below the diagonal, `V_j c_j`, where `V_j` applies the later
    /// reflectors `R(v_{j+2}), …, R(v_k)` on their trailing blocks in order.
    pub fn subdiagonal_column(&self, j: usize) -> Result<Vec<C64>> {
        let mut x = self.c_list[j].clone();
        for (l, v) in self.v_list.iter().enumerate().skip(j + 1) {
            let off = l - j - 1;
            HouseholderReflector::new(v)?.apply_vec(&mut x[off..]);
        }
        Ok(x)
    }

    /// Row `j` of `U^* A U` right of the diagonal, `(V_j b_j)^*`.
    pub fn superdiagonal_row(&self, j: usize) -> Result<Vec<C64>> {
        let mut x = self.b_list[j].clone();
        for (l, v) in self.v_list.iter().enumerate().skip(j + 1) {
            let off = l - j - 1;
            HouseholderReflector::new(v)?.apply_vec(&mut x[off..]);
        }
        Ok(x.iter().map(|z| z.conj()).collect())
    }

    /// `U^* A U` built from the chain alone: rows/columns `j < k` from `(a_j, b_j, c_j)`
    /// and the trailing block `A⁽ᵏ⁾`.
    pub fn block_form(&self) -> Result<ComplexMatrix> {
        let n = self.n();
        let k = self.k();
        let mut m = ComplexMatrix::zeros(n, n);
        for j in 0..k {
            m[(j, j)] = self.a_list[j];
            for (i, x) in self.subdiagonal_column(j)?.into_iter().enumerate() {
                m[(j + 1 + i, j)] = x;
            }
            for (i, x) in self.superdiagonal_row(j)?.into_iter().enumerate() {
                m[(j, j + 1 + i)] = x;
            }
        }
        m.set_block(k, k, &self.a_matrices[k]);
        Ok(m)
    }
}
