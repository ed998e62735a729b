use super::householder::column_reflector;
use super::matrix::{dotc, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Allowed |H - H^*| relative to max(1, max|H_ij|).
pub const HERMITIAN_TOL: f64 = 1e-12;
const QL_MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and orthonormal
/// eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn eigh(h: &ComplexMatrix) -> Result<HermitianEigen> {
    eigh_impl(h, true)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(h: &ComplexMatrix) -> Result<Vec<f64>> {
    eigh_impl(h, false).map(|e| e.values)
}

fn eigh_impl(h: &ComplexMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", h.rows(), h.cols())));
    }
    if !h.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = h.rows();
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL * h.norm_max().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: a });
    }

    let (d, e, q) = tridiagonalize(&mut a, want_vectors);
    let mut d = d;
    // Make the off-diagonal real and nonnegative with a diagonal phase change.
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut er = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let m = e[k].norm();
        er[k] = m;
        phases[k + 1] = if m > 0.0 { phases[k] * e[k] / m } else { phases[k] };
    }
    let mut z = if want_vectors {
        let mut q = q.expect("vectors requested");
        for (j, p) in phases.iter().enumerate() {
            for x in q.col_mut(j) {
                *x *= p;
            }
        }
        Some(q)
    } else {
        None
    };
    tql2(&mut d, &mut er, z.as_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = match z {
        Some(z) => ComplexMatrix::from_fn(n, n, |i, j| z[(i, order[j])]),
        None => ComplexMatrix::zeros(0, 0),
    };
    Ok(HermitianEigen { values, vectors })
}

/// Householder reduction `A = Q T Q^*`; returns diag(T), subdiag(T) (complex) and Q.
fn tridiagonalize(a: &mut ComplexMatrix, want_q: bool) -> (Vec<f64>, Vec<C64>, Option<ComplexMatrix>) {
    let n = a.rows();
    let mut sub = vec![ZERO; n];
    let mut reflectors: Vec<(usize, Vec<C64>)> = Vec::new();
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = a.col(k)[k + 1..].to_vec();
        let (w, beta) = column_reflector(&x);
        sub[k] = beta;
        if w.iter().all(|z| *z == ZERO) {
            continue;
        }
        let m = n - k - 1;
        // Trailing block B <- P B P with P = 1 - 2ww^*: B - 2 w q^* - 2 q w^*,
        // where p = B w and q = p - (w^* p) w.
        let p = &mut p[..m];
        p.iter_mut().for_each(|z| *z = ZERO);
        for (jj, wj) in w.iter().enumerate() {
            let col = &a.col(k + 1 + jj)[k + 1..];
            for (pi, &b) in p.iter_mut().zip(col) {
                *pi += b * wj;
            }
        }
        let kappa = dotc(&w, p);
        for (pi, wi) in p.iter_mut().zip(&w) {
            *pi -= kappa * wi;
        }
        for jj in 0..m {
            let wj2 = w[jj].conj() * 2.0;
            let qj2 = p[jj].conj() * 2.0;
            let col = &mut a.col_mut(k + 1 + jj)[k + 1..];
            for ((c, wi), qi) in col.iter_mut().zip(&w).zip(p.iter()) {
                *c -= wi * qj2 + qi * wj2;
            }
        }
        reflectors.push((k, w));
    }
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    if n >= 2 {
        sub[n - 2] = a[(n - 1, n - 2)];
    }
    let q = want_q.then(|| {
        let mut q = ComplexMatrix::identity(n);
        // Q = P_0 P_1 ...; apply from the last reflector so each touches a shrinking block.
        for (k, w) in reflectors.iter().rev() {
            for j in k + 1..n {
                let c = &mut q.col_mut(j)[k + 1..];
                let s = dotc(w, c) * 2.0;
                for (ci, wi) in c.iter_mut().zip(w) {
                    *ci -= s * wi;
                }
            }
        }
        q
    });
    (d, sub, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal `d`, subdiagonal `e`
/// with `e[i]` coupling i and i+1), accumulating rotations into `z`.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut ComplexMatrix>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::Numerical(format!("tridiagonal QL did not converge at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (zi, zi1) = z.two_cols_mut(i, i + 1);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = *a * s + f * c;
                        *a = *a * c - f * s;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
