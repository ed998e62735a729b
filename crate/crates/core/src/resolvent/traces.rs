//! Traces of resolvent chains in the singular basis of `A − z`.
//!
//! With `Q = diag(U, V)`, `Q^* G Q = [[iηD, DΣ], [DΣ, iηD]]`, `Q^* E Q = [[0, W^*], [0, 0]]`
//! and `Q^* E^* Q = [[0, 0], [W, 0]]`. Each factor `G B` is then a 2×2 block matrix whose
//! blocks are `diag(d) X` with `X ∈ {1, W, W^*}`.

use serde::{Deserialize, Serialize};

use super::HermitisationFactorization;
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockOp {
    /// The 2N×2N identity.
    Identity,
    /// `[[0, 1], [0, 0]]`.
    E,
    /// `[[0, 0], [1, 0]]`.
    EAdj,
}

impl BlockOp {
    /// The 2N×2N matrix in the standard basis.
    pub fn matrix(self, n: usize) -> ComplexMatrix {
        let one = ComplexMatrix::identity(n);
        let zero = ComplexMatrix::zeros(n, n);
        match self {
            BlockOp::Identity => ComplexMatrix::identity(2 * n),
            BlockOp::E => ComplexMatrix::from_blocks(&zero, &one, &zero, &zero),
            BlockOp::EAdj => ComplexMatrix::from_blocks(&zero, &zero, &one, &zero),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Id,
    W,
    WAdj,
}

/// `diag(d) X`.
struct Block {
    d: Vec<C64>,
    kind: Kind,
}

type Factor = [[Option<Block>; 2]; 2];

/// Diagonals `a = iηD`, `b = DΣ` of the rotated resolvent.
fn ab(f: &HermitisationFactorization, eta: f64) -> (Vec<C64>, Vec<C64>) {
    let e2 = eta * eta;
    f.s.iter()
        .map(|&s| {
            let d = 1.0 / (e2 + s * s);
            (C64::new(0.0, eta * d), C64::new(s * d, 0.0))
        })
        .unzip()
}

fn factor(f: &HermitisationFactorization, eta: f64, op: BlockOp) -> Factor {
    let (a, b) = ab(f, eta);
    let blk = |d: &Vec<C64>, kind| Some(Block { d: d.clone(), kind });
    match op {
        BlockOp::Identity => [[blk(&a, Kind::Id), blk(&b, Kind::Id)], [blk(&b, Kind::Id), blk(&a, Kind::Id)]],
        BlockOp::E => [[None, blk(&a, Kind::WAdj)], [None, blk(&b, Kind::WAdj)]],
        BlockOp::EAdj => [[blk(&b, Kind::W), None], [blk(&a, Kind::W), None]],
    }
}

/// Entry `(i, j)` of `X` read from column `j`.
#[inline]
fn entry(f: &HermitisationFactorization, kind: Kind, i: usize, j: usize) -> C64 {
    match kind {
        Kind::Id => {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }
        Kind::W => f.w.col(j)[i],
        Kind::WAdj => f.w_adj.col(j)[i],
    }
}

/// `tr(diag(p) X diag(q) Y) = Σ_ij p_i X_ij q_j Y_ji`.
fn pair_term(f: &HermitisationFactorization, p: &Block, q: &Block) -> C64 {
    let n = f.n();
    match (p.kind, q.kind) {
        (Kind::Id, Kind::Id) => (0..n).map(|i| p.d[i] * q.d[i]).sum(),
        (Kind::Id, k) | (k, Kind::Id) => (0..n).map(|i| p.d[i] * q.d[i] * entry(f, k, i, i)).sum(),
        (kx, ky) => {
            // Y_ji = conj((Y^*)_ij), and Y^* of W is W^* and vice versa.
            let ystar = if ky == Kind::W { &f.w_adj } else { &f.w };
            let x = if kx == Kind::W { &f.w } else { &f.w_adj };
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let xc = x.col(j);
                let yc = ystar.col(j);
                let mut col = C64::new(0.0, 0.0);
                for i in 0..n {
                    col += p.d[i] * xc[i] * yc[i].conj();
                }
                acc += col * q.d[j];
            }
            acc
        }
    }
}

pub(super) fn single(f: &HermitisationFactorization, eta: f64, op: BlockOp) -> C64 {
    let n = f.n();
    let fac = factor(f, eta, op);
    let mut tr = C64::new(0.0, 0.0);
    for r in 0..2 {
        if let Some(b) = &fac[r][r] {
            tr += (0..n).map(|i| b.d[i] * entry(f, b.kind, i, i)).sum::<C64>();
        }
    }
    tr / n as f64
}

pub(super) fn pair(f: &HermitisationFactorization, first: (f64, BlockOp), second: (f64, BlockOp)) -> C64 {
    let p = factor(f, first.0, first.1);
    let q = factor(f, second.0, second.1);
    let mut tr = C64::new(0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            if let (Some(x), Some(y)) = (&p[r][c], &q[c][r]) {
                tr += pair_term(f, x, y);
            }
        }
    }
    tr / f.n() as f64
}

/// Dense 2N×2N form of one factor in the singular basis.
fn dense(f: &HermitisationFactorization, fac: &Factor) -> ComplexMatrix {
    let n = f.n();
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    for r in 0..2 {
        for c in 0..2 {
            if let Some(b) = &fac[r][c] {
                for j in 0..n {
                    for i in 0..n {
                        m[(r * n + i, c * n + j)] = b.d[i] * entry(f, b.kind, i, j);
                    }
                }
            }
        }
    }
    m
}

pub(super) fn chain(f: &HermitisationFactorization, links: &[(f64, BlockOp)]) -> C64 {
    match links {
        [] => C64::new(2.0, 0.0),
        [(eta, op)] => single(f, *eta, *op),
        [a, b] => pair(f, *a, *b),
        _ if links.iter().all(|(_, op)| *op != BlockOp::Identity) => off_diagonal_chain(f, links),
        _ => {
            let (last, init) = links.split_last().expect("non-empty");
            let mut acc = dense(f, &factor(f, init[0].0, init[0].1));
            for &(eta, op) in &init[1..] {
                acc = acc.matmul(&dense(f, &factor(f, eta, op)));
            }
            let tail = dense(f, &factor(f, last.0, last.1));
            // tr(P T) = Σ_ij P_ij T_ji
            let m = acc.rows();
            let mut tr = C64::new(0.0, 0.0);
            for j in 0..m {
                let pc = acc.col(j);
                for i in 0..m {
                    tr += pc[i] * tail[(j, i)];
                }
            }
            tr / f.n() as f64
        }
    }
}

/// Chains with every `B ∈ {E, E^*}`. Each factor is `L_k R_{c_k}` with `R_1 = [1, 0]`,
/// `R_2 = [0, 1]`, so the trace collapses to a product of N×N blocks `R_{c_{k-1}} L_k`.
fn off_diagonal_chain(f: &HermitisationFactorization, links: &[(f64, BlockOp)]) -> C64 {
    let m = links.len();
    let n = f.n();
    let mats: Vec<ComplexMatrix> = (0..m)
        .map(|k| {
            let (eta, op) = links[k];
            let prev = links[(k + m - 1) % m].1;
            let (a, b) = ab(f, eta);
            // Block row selected by the previous factor's column: E lives in column 2.
            let top = prev == BlockOp::EAdj;
            let (d, x) = match op {
                BlockOp::E => (if top { a } else { b }, &f.w_adj),
                BlockOp::EAdj => (if top { b } else { a }, &f.w),
                BlockOp::Identity => unreachable!(),
            };
            ComplexMatrix::from_fn(n, n, |i, j| d[i] * x[(i, j)])
        })
        .collect();
    let (last, init) = mats.split_last().expect("non-empty");
    let mut acc = init[0].clone();
    for mk in &init[1..] {
        acc = acc.matmul(mk);
    }
    let mut tr = C64::new(0.0, 0.0);
    for j in 0..n {
        let pc = acc.col(j);
        for i in 0..n {
            tr += pc[i] * last[(j, i)];
        }
    }
    tr / n as f64
}
