use super::householder::column_reflector;
use super::matrix::{dotc, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative deflation threshold for subdiagonal entries.
pub const DEFLATION_TOL: f64 = 1e-14;
/// Iteration budget per deflated eigenvalue.
pub const MAX_ITER_PER_EIGENVALUE: usize = 40;
const EXCEPTIONAL_PERIOD: usize = 10;
/// Rotations per block when deferring row updates far from the diagonal.
const SWEEP_CHUNK: usize = 48;

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    pub converged: bool,
    pub iterations: usize,
    /// ‖A - Q T Q^*‖_F / ‖A‖_F of the accumulated Schur form.
    pub backward_error: f64,
}

/// Complex Schur form `A = Q T Q^*` with `T` upper triangular.
#[derive(Clone, Debug)]
pub struct SchurDecomposition {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
    pub iterations: usize,
}

impl SchurDecomposition {
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.t.diag()
    }

    /// Right eigenvector for the diagonal entry `p` of `T`, unit norm.
    pub fn eigenvector(&self, p: usize) -> Vec<C64> {
        let t = &self.t;
        let n = t.rows();
        let lambda = t[(p, p)];
        let scale = t.norm_max().max(f64::MIN_POSITIVE);
        let mut y = vec![ZERO; n];
        y[p] = ONE;
        for j in (0..p).rev() {
            let mut s = ZERO;
            for l in j + 1..=p {
                s += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < f64::EPSILON * scale {
                d = C64::new(f64::EPSILON * scale, 0.0);
            }
            y[j] = -s / d;
        }
        let mut v = self.q.matvec(&y);
        super::matrix::normalize(&mut v);
        v
    }
}

/// Reduces `a` to upper Hessenberg form in place; returns the accumulated unitary factor
/// when requested.
pub fn hessenberg_in_place(h: &mut ComplexMatrix, want_q: bool) -> Option<ComplexMatrix> {
    let n = h.rows();
    let mut q = want_q.then(|| ComplexMatrix::identity(n));
    if n < 3 {
        return q;
    }
    let mut y = vec![ZERO; n];
    for k in 0..n - 2 {
        let x: Vec<C64> = h.col(k)[k + 1..].to_vec();
        let (w, beta) = column_reflector(&x);
        if w.iter().all(|z| *z == ZERO) {
            continue;
        }
        // Left: rows k+1.., columns k+1.. (column k is set explicitly).
        for j in k + 1..n {
            let c = &mut h.col_mut(j)[k + 1..];
            let s = dotc(&w, c) * 2.0;
            for (ci, wi) in c.iter_mut().zip(&w) {
                *ci -= s * wi;
            }
        }
        {
            let c = h.col_mut(k);
            c[k + 1] = beta;
            for z in &mut c[k + 2..] {
                *z = ZERO;
            }
        }
        // Right: all rows, columns k+1..
        y.iter_mut().for_each(|z| *z = ZERO);
        for (jj, wj) in w.iter().enumerate() {
            for (yi, &hij) in y.iter_mut().zip(h.col(k + 1 + jj)) {
                *yi += hij * wj;
            }
        }
        for (jj, wj) in w.iter().enumerate() {
            let c = wj.conj() * 2.0;
            for (hij, &yi) in h.col_mut(k + 1 + jj).iter_mut().zip(&y) {
                *hij -= yi * c;
            }
        }
        if let Some(q) = q.as_mut() {
            y.iter_mut().for_each(|z| *z = ZERO);
            for (jj, wj) in w.iter().enumerate() {
                for (yi, &qij) in y.iter_mut().zip(q.col(k + 1 + jj)) {
                    *yi += qij * wj;
                }
            }
            for (jj, wj) in w.iter().enumerate() {
                let c = wj.conj() * 2.0;
                for (qij, &yi) in q.col_mut(k + 1 + jj).iter_mut().zip(&y) {
                    *qij -= yi * c;
                }
            }
        }
    }
    q
}

#[inline]
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    if bc == ZERO {
        return d;
    }
    let disc = (p * p + bc).sqrt();
    let den = if (p + disc).norm() >= (p - disc).norm() { p + disc } else { p - disc };
    if den == ZERO {
        d
    } else {
        d - bc / den
    }
}

/// Single-shift implicit QR on an upper Hessenberg matrix. With `q` present the full
/// Schur form is maintained; otherwise only the active window is updated.
fn hessenberg_qr(h: &mut ComplexMatrix, mut q: Option<&mut ComplexMatrix>) -> Result<usize> {
    let n = h.rows();
    if n == 0 {
        return Ok(0);
    }
    let full = q.is_some();
    let hnorm = h.norm_fro().max(f64::MIN_POSITIVE);
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    let mut rotations: Vec<(f64, C64)> = Vec::with_capacity(SWEEP_CHUNK);
    loop {
        if hi == 0 {
            break;
        }
        // Locate the bottom of the unreduced block.
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let sub = h[(k, k - 1)].norm();
            let mut scale = h[(k - 1, k - 1)].norm() + h[(k, k)].norm();
            if scale == 0.0 {
                scale = hnorm;
            }
            if sub <= DEFLATION_TOL * scale {
                h[(k, k - 1)] = ZERO;
                lo = k;
                break;
            }
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if since_deflation >= MAX_ITER_PER_EIGENVALUE {
            let partial = (hi + 1..n).map(|i| h[(i, i)]).collect::<Vec<_>>();
            return Err(Error::NoConvergence { iterations: total, found: partial.len(), n, partial });
        }
        since_deflation += 1;
        total += 1;

        let mu = if since_deflation % EXCEPTIONAL_PERIOD == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let col_end = if full { n } else { hi + 1 };
        let row_start = if full { 0 } else { lo };
        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        let mut k0 = lo;
        while k0 < hi {
            let k1 = (k0 + SWEEP_CHUNK).min(hi) - 1;
            // Row rotations reach columns past `near` only after the chunk, in one pass per column.
            let near = (k1 + 1).min(col_end - 1);
            rotations.clear();
            for k in k0..=k1 {
                if k > lo {
                    x = h[(k, k - 1)];
                    y = h[(k + 1, k - 1)];
                }
                let (c, s) = givens(x, y);
                rotations.push((c, s));
                let first_col = if k > lo { k - 1 } else { k };
                let sc = s.conj();
                {
                    let data = h.as_mut_slice();
                    for col in data[first_col * n..(near + 1) * n].chunks_exact_mut(n) {
                        let pair = &mut col[k..k + 2];
                        let (a, b) = (pair[0], pair[1]);
                        pair[0] = a * c + s * b;
                        pair[1] = b * c - sc * a;
                    }
                }
                if k > lo {
                    h[(k + 1, k - 1)] = ZERO;
                }
                let last_row = (k + 2).min(hi);
                {
                    let (ck, ck1) = h.two_cols_mut(k, k + 1);
                    for (x, y) in ck[row_start..=last_row].iter_mut().zip(ck1[row_start..=last_row].iter_mut()) {
                        let (a, b) = (*x, *y);
                        *x = a * c + b * sc;
                        *y = b * c - a * s;
                    }
                }
                if let Some(q) = q.as_deref_mut() {
                    let (qk, qk1) = q.two_cols_mut(k, k + 1);
                    for (a, b) in qk.iter_mut().zip(qk1.iter_mut()) {
                        let (ua, ub) = (*a, *b);
                        *a = ua * c + ub * sc;
                        *b = ub * c - ua * s;
                    }
                }
            }
            if near + 1 < col_end {
                let data = h.as_mut_slice();
                for col in data[(near + 1) * n..col_end * n].chunks_exact_mut(n) {
                    let seg = &mut col[k0..k1 + 2];
                    for (i, &(c, s)) in rotations.iter().enumerate() {
                        let (a, b) = (seg[i], seg[i + 1]);
                        seg[i] = a * c + s * b;
                        seg[i + 1] = b * c - s.conj() * a;
                    }
                }
            }
            k0 = k1 + 1;
        }
    }
    Ok(total)
}

pub fn schur_decomposition(a: &ComplexMatrix) -> Result<SchurDecomposition> {
    check_square_finite(a)?;
    let mut t = a.clone();
    let mut q = hessenberg_in_place(&mut t, true).expect("q requested");
    let iterations = hessenberg_qr(&mut t, Some(&mut q))?;
    let n = t.rows();
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }
    Ok(SchurDecomposition { q, t, iterations })
}

/// Eigenvalues with the accumulated Schur form and its backward error.
pub fn eigenvalues_complex(a: &ComplexMatrix) -> Result<SpectrumResult> {
    let s = schur_decomposition(a)?;
    let recon = s.q.matmul(&s.t).matmul(&s.q.adjoint());
    let an = a.norm_fro();
    let backward_error = if an > 0.0 { (a - &recon).norm_fro() / an } else { recon.norm_fro() };
    Ok(SpectrumResult { eigenvalues: s.eigenvalues(), converged: true, iterations: s.iterations, backward_error })
}

/// Eigenvalues only; skips the Schur vectors and updates just the active window.
pub fn eigenvalues_only(a: &ComplexMatrix) -> Result<Vec<C64>> {
    check_square_finite(a)?;
    let mut h = a.clone();
    hessenberg_in_place(&mut h, false);
    hessenberg_qr(&mut h, None)?;
    Ok(h.diag())
}

fn check_square_finite(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Sorts by real part, then imaginary part.
pub fn sort_lexicographic(z: &mut [C64]) {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}
