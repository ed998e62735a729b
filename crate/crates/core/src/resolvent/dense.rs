//! Direct evaluation from the dense inverse `(𝓗_z − iη)^{-1}`. O(N³) per `(z, η)`; used
//! as an independent check on the factorization path.

use super::{hermitise, BlockOp, ResolventDiagnostics};
use crate::error::{Error, Result};
use crate::linalg::{log_abs_det, solve_shifted, ComplexMatrix, C64};

pub fn resolvent(a: &ComplexMatrix, z: C64, eta: f64) -> Result<ComplexMatrix> {
    if !(eta > 0.0) {
        return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
    }
    let h = hermitise(a, z);
    solve_shifted(&h, C64::new(0.0, eta), &ComplexMatrix::identity(h.rows()))
}

/// `N^{-1} tr(M_1 M_2 ⋯)` with `N` half the dimension.
pub fn normalized_trace(factors: &[&ComplexMatrix]) -> C64 {
    let (first, rest) = factors.split_first().expect("at least one factor");
    let mut p = (*first).clone();
    for m in rest {
        p = p.matmul(m);
    }
    p.trace() / (p.rows() / 2) as f64
}

pub fn diagnostics(a: &ComplexMatrix, z: C64, eta: f64, t: Option<f64>) -> Result<ResolventDiagnostics> {
    let n = a.rows();
    let g = resolvent(a, z, eta)?;
    let e = BlockOp::E.matrix(n);
    let es = BlockOp::EAdj.matrix(n);
    let i = C64::new(0.0, 1.0);
    let tr_g = normalized_trace(&[&g]);
    let tr_g2 = normalized_trace(&[&g, &g]);
    let gv = 0.5 * tr_g.im;
    let alpha = -normalized_trace(&[&g, &e, &g, &es]).re;
    let beta = normalized_trace(&[&g, &g, &es]) / (2.0 * i);
    let gamma = ((tr_g - i * eta * tr_g2) / (4.0 * i * eta)).re;
    let delta = normalized_trace(&[&g, &es, &g, &es]);
    let sigma = alpha + beta.norm_sqr() / gamma;
    let tau = (beta * beta + delta * gamma) / (gamma * sigma);
    let h = hermitise(a, z);
    let phi = match t {
        Some(t) => Some(eta * eta / t - log_abs_det(&h.shifted(C64::new(0.0, eta)))? / n as f64),
        None => None,
    };
    Ok(ResolventDiagnostics { eta, g: gv, alpha, beta, gamma, delta, sigma, tau, phi })
}

/// `N^{-1} tr(G(η₁) B₁ ⋯ G(η_k) B_k)` by dense inverses.
pub fn trace_chain(a: &ComplexMatrix, z: C64, chain: &[(f64, BlockOp)]) -> Result<C64> {
    let n = a.rows();
    let mut mats = Vec::with_capacity(2 * chain.len());
    for &(eta, op) in chain {
        mats.push(resolvent(a, z, eta)?);
        mats.push(op.matrix(n));
    }
    let refs: Vec<&ComplexMatrix> = mats.iter().collect();
    Ok(normalized_trace(&refs))
}
