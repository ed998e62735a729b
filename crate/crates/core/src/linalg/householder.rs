use super::matrix::{dotc, norm2, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Reflector `R(v) = 1 - 2 u u^*` exchanging the unit vector `v` with `e^{i arg v_1} e_1`.
///
/// The direction is `u ∝ v - e^{i arg v_1} e_1`, so `R` depends only on the ray of `v`:
/// `R(e^{iφ} v) = R(v)`. When `v` is already a multiple of `e_1` the reflector is the identity.
#[derive(Clone, Debug)]
pub struct HouseholderReflector {
    dim: usize,
    /// Unit direction, or all zeros when `R` is the identity.
    u: Vec<C64>,
    /// `e^{i arg v_1}` (1 when `v_1 = 0`).
    phase: C64,
}

const UNIT_TOL: f64 = 1e-10;

impl HouseholderReflector {
    pub fn new(v: &[C64]) -> Result<Self> {
        let n = norm2(v);
        if v.is_empty() || n == 0.0 {
            return Err(Error::InvalidInput("reflector needs a nonzero vector".into()));
        }
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidInput(format!("reflector vector has norm {n}, expected 1")));
        }
        let a = v[0].norm();
        let phase = if a > 0.0 { v[0] / a } else { ONE };
        let mut u: Vec<C64> = v.iter().map(|z| z / n).collect();
        u[0] -= phase;
        let un = norm2(&u);
        // ‖u‖² = 2(1 - |v_1|); below this scale R is the identity to working precision.
        if un <= 1e-15 {
            u.iter_mut().for_each(|z| *z = ZERO);
        } else {
            u.iter_mut().for_each(|z| *z /= un);
        }
        Ok(Self { dim: v.len(), u, phase })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn direction(&self) -> &[C64] {
        &self.u
    }

    pub fn phase(&self) -> C64 {
        self.phase
    }

    pub fn is_identity(&self) -> bool {
        self.u.iter().all(|z| *z == ZERO)
    }

    pub fn apply_vec(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        let s = dotc(&self.u, x) * 2.0;
        for (xi, ui) in x.iter_mut().zip(&self.u) {
            *xi -= s * ui;
        }
    }

    pub fn apply_left(&self, m: &mut ComplexMatrix) {
        assert_eq!(m.rows(), self.dim);
        for j in 0..m.cols() {
            self.apply_vec(m.col_mut(j));
        }
    }

    pub fn apply_right(&self, m: &mut ComplexMatrix) {
        assert_eq!(m.cols(), self.dim);
        // M R = M - 2 (M u) u^*
        let mu = m.matvec(&self.u);
        for j in 0..self.dim {
            let c = self.u[j].conj() * 2.0;
            if c == ZERO {
                continue;
            }
            for (x, &y) in m.col_mut(j).iter_mut().zip(&mu) {
                *x -= y * c;
            }
        }
    }

    /// `R M R`.
    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = m.clone();
        self.apply_left(&mut out);
        self.apply_right(&mut out);
        out
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(self.dim);
        self.apply_left(&mut m);
        m
    }
}

/// Reflector `P = 1 - 2 w w^*` mapping `x` onto `β e_1` with `|β| = ‖x‖`, used by the
/// Hessenberg and tridiagonal reductions. Returns `(w, β)`; `w` is zero when `x` is already
/// aligned with `e_1`.
pub(crate) fn column_reflector(x: &[C64]) -> (Vec<C64>, C64) {
    let xn = norm2(x);
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if xn == 0.0 || tail == 0.0 {
        return (vec![ZERO; x.len()], x[0]);
    }
    let a = x[0].norm();
    let phase = if a > 0.0 { x[0] / a } else { ONE };
    let beta = -phase * xn;
    let mut w = x.to_vec();
    w[0] -= beta;
    let wn = norm2(&w);
    w.iter_mut().for_each(|z| *z /= wn);
    (w, beta)
}
