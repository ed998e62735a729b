use super::eigh::eigh;
use super::matrix::{dotc, norm2, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// `X = U diag(s) V^*` with `s` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub s: Vec<f64>,
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
}

/// Eigenvectors `[u; v]` whose halves are this unbalanced are re-derived by completion.
const HALF_BALANCE_MIN: f64 = 0.2;
/// Singular values below this fraction of the largest are treated as exact zeros, whose
/// singular vectors are any orthonormal completion.
const ZERO_CLUSTER_TOL: f64 = 1e-12;

/// Singular value decomposition of a square matrix from the Hermitian eigenproblem of
/// `[[0, X], [X^*, 0]]`, whose eigenvalues are `±s_i`.
pub fn svd_via_hermitisation(x: &ComplexMatrix) -> Result<Svd> {
    if !x.is_square() {
        return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", x.rows(), x.cols())));
    }
    let n = x.rows();
    let zero = ComplexMatrix::zeros(n, n);
    let h = ComplexMatrix::from_blocks(&zero, x, &x.adjoint(), &zero);
    let eig = eigh(&h)?;

    let mut s = Vec::with_capacity(n);
    let mut u_cols: Vec<Option<Vec<C64>>> = Vec::with_capacity(n);
    let mut v_cols: Vec<Option<Vec<C64>>> = Vec::with_capacity(n);
    let smax = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let zero_tol = ZERO_CLUSTER_TOL * smax;
    // The top n eigenvalues, descending.
    for k in 0..n {
        let idx = 2 * n - 1 - k;
        s.push(eig.values[idx].max(0.0));
        let col = eig.vectors.col(idx);
        let (top, bot) = col.split_at(n);
        let (nt, nb) = (norm2(top), norm2(bot));
        // ±s eigenvectors are [u; v] and [u; -v]; any mixture keeps each half parallel
        // to u or v, so the halves can be normalized separately.
        if s[k] > zero_tol && nt >= HALF_BALANCE_MIN && nb >= HALF_BALANCE_MIN {
            u_cols.push(Some(top.iter().map(|z| z / nt).collect()));
            v_cols.push(Some(bot.iter().map(|z| z / nb).collect()));
        } else {
            u_cols.push(None);
            v_cols.push(None);
        }
    }
    let u = complete_orthonormal(n, u_cols);
    let v = complete_orthonormal(n, v_cols);
    Ok(Svd { s, u, v })
}

/// Fills missing columns with an orthonormal completion of the present ones.
fn complete_orthonormal(n: usize, cols: Vec<Option<Vec<C64>>>) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = cols.iter().flatten().cloned().collect();
    let mut fills: Vec<Vec<C64>> = Vec::new();
    let missing = cols.iter().filter(|c| c.is_none()).count();
    let mut e = 0;
    while fills.len() < missing && e < n {
        let mut cand = vec![ZERO; n];
        cand[e] = C64::new(1.0, 0.0);
        e += 1;
        for _ in 0..2 {
            for b in basis.iter() {
                let p = dotc(b, &cand);
                for (c, bi) in cand.iter_mut().zip(b) {
                    *c -= p * bi;
                }
            }
        }
        let nc = norm2(&cand);
        if nc > 1e-6 {
            cand.iter_mut().for_each(|z| *z /= nc);
            basis.push(cand.clone());
            fills.push(cand);
        }
    }
    let mut fills = fills.into_iter();
    let mut m = ComplexMatrix::zeros(n, n);
    for (j, c) in cols.into_iter().enumerate() {
        let c = c.unwrap_or_else(|| fills.next().expect("completion exhausted"));
        m.col_mut(j).copy_from_slice(&c);
    }
    m
}

/// Spectral norm ‖X‖_2.
pub fn operator_norm(x: &ComplexMatrix) -> Result<f64> {
    if x.rows() == 0 || x.cols() == 0 {
        return Ok(0.0);
    }
    let g = if x.rows() >= x.cols() { x.adjoint_matmul(x) } else { x.matmul(&x.adjoint()) };
    let vals = super::eigh::eigvalsh(&g)?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Singular values, descending.
pub fn singular_values(x: &ComplexMatrix) -> Result<Vec<f64>> {
    if !x.is_square() {
        return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", x.rows(), x.cols())));
    }
    let n = x.rows();
    let zero = ComplexMatrix::zeros(n, n);
    let h = ComplexMatrix::from_blocks(&zero, x, &x.adjoint(), &zero);
    let vals = super::eigh::eigvalsh(&h)?;
    Ok(vals[n..].iter().rev().map(|v| v.max(0.0)).collect())
}

/// Orthonormal basis (N×(N−k)) of the complement of the span of an orthonormal N×k frame.
pub fn orthonormal_complement(frame: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = frame.shape();
    if k > n {
        return Err(Error::DimensionMismatch(format!("frame has {k} columns in dimension {n}")));
    }
    let gram = frame.adjoint_matmul(frame);
    if gram.max_abs_diff(&ComplexMatrix::identity(k)) > 1e-10 {
        return Err(Error::InvalidInput("frame columns are not orthonormal".into()));
    }
    let mut cols: Vec<Option<Vec<C64>>> = (0..k).map(|j| Some(frame.col(j).to_vec())).collect();
    cols.extend((k..n).map(|_| None));
    let full = complete_orthonormal(n, cols);
    Ok(full.submatrix(0, k, n, n - k))
}
