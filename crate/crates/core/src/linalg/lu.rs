use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Pivots at or below this fraction of ‖M‖_F count as singular.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    /// Factors `m`; fails with the offending pivot index if `m` is numerically singular.
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        let lu = Self::factor_unchecked(m)?;
        let scale = m.norm_fro();
        let n = m.rows();
        for k in 0..n {
            let p = lu.lu[(k, k)].norm();
            if p <= SINGULAR_PIVOT_TOL * scale || p == 0.0 {
                return Err(Error::Singular { pivot: k, magnitude: p });
            }
        }
        Ok(lu)
    }

    /// Factors without the singularity check; determinants of singular matrices come out 0.
    pub fn factor_unchecked(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
        }
        let n = m.rows();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (mut piv, mut best) = (k, -1.0);
            for i in k..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if piv != k {
                for j in 0..n {
                    let col = lu.col_mut(j);
                    col.swap(k, piv);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let p = lu[(k, k)];
            if p == ZERO {
                continue;
            }
            let inv = ONE / p;
            for x in &mut lu.col_mut(k)[k + 1..] {
                *x *= inv;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == ZERO {
                    continue;
                }
                let (ck, cj) = lu.two_cols_mut(k, j);
                for (x, &l) in cj[k + 1..].iter_mut().zip(&ck[k + 1..]) {
                    *x -= l * ukj;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn det(&self) -> C64 {
        self.lu.diag().iter().fold(C64::new(self.sign, 0.0), |acc, &u| acc * u)
    }

    /// log|det M|.
    pub fn log_abs_det(&self) -> f64 {
        self.lu.diag().iter().map(|u| u.norm().ln()).sum()
    }

    /// Phase of det M as a unit complex number.
    pub fn det_phase(&self) -> C64 {
        self.lu.diag().iter().fold(C64::new(self.sign, 0.0), |acc, &u| {
            let a = u.norm();
            if a > 0.0 {
                acc * (u / a)
            } else {
                acc
            }
        })
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for k in 0..n {
            let xk = x[k];
            if xk == ZERO {
                continue;
            }
            for (xi, &l) in x[k + 1..].iter_mut().zip(&self.lu.col(k)[k + 1..]) {
                *xi -= l * xk;
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.lu[(k, k)];
            let xk = x[k];
            for (xi, &u) in x[..k].iter_mut().zip(&self.lu.col(k)[..k]) {
                *xi -= u * xk;
            }
        }
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows(), self.dim());
        let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(b.col(j));
            out.col_mut(j).copy_from_slice(&x);
        }
        out
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve(&ComplexMatrix::identity(self.dim()))
    }
}

/// Solves `(H - shift) X = B`.
pub fn solve_shifted(h: &ComplexMatrix, shift: C64, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !h.is_square() || h.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{}, right-hand side has {} rows",
            h.rows(),
            h.cols(),
            b.rows()
        )));
    }
    let lu = Lu::new(&h.shifted(shift))?;
    Ok(lu.solve(b))
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(Lu::new(m)?.inverse())
}

pub fn det(m: &ComplexMatrix) -> Result<C64> {
    Ok(Lu::factor_unchecked(m)?.det())
}

/// log|det M| (−∞ for exactly singular matrices).
pub fn log_abs_det(m: &ComplexMatrix) -> Result<f64> {
    Ok(Lu::factor_unchecked(m)?.log_abs_det())
}
