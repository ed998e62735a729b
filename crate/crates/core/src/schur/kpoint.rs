//! Two independent Monte-Carlo estimates of the k-point eigenvalue density of
//! `A + √t·G` (G Ginibre with variance 1/N), averaged over small disks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, eigenvalues_only, ComplexMatrix, C64};
use crate::rng::{gaussian_matrix, ginibre, stream, streams, uniform_disk, uniform_sphere};

use super::project_chain;
use crate::integrals::ln_sphere_volume;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KPointOptions {
    pub t: f64,
    /// One disk center per eigenvalue slot; the disks must not overlap.
    pub centers: Vec<C64>,
    pub radius: f64,
    pub samples_lhs: usize,
    pub samples_rhs: usize,
    pub seed: u64,
}

/// Both sides are disk-averaged densities: the integral over the product of disks divided
/// by its area.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KPointEstimate {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub z_score: f64,
    /// Some estimate has relative standard error above 0.5.
    pub inconclusive: bool,
}

/// Upper bound on the relative standard error of a conclusive estimate.
pub const INCONCLUSIVE_REL_STDERR: f64 = 0.5;

fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// Integrand of the k-point formula at `z` for one draw of the sphere vectors and of the
/// Gaussian part of `M⁽ᵏ⁾`, with the sphere measure folded in.
fn rhs_sample(a: &ComplexMatrix, t: f64, z: &[C64], v_list: &[Vec<C64>], noise: &ComplexMatrix) -> Result<f64> {
    let n = a.rows();
    let k = z.len();
    let nf = n as f64;
    let chain = project_chain(a, v_list)?;
    let mut log_w = -(k as f64) * std::f64::consts::TAU.ln();
    let mut quad = 0.0;
    for i in 0..k {
        let dim = n - i;
        log_w += dim as f64 * (nf / (std::f64::consts::PI * t)).ln() + ln_sphere_volume(dim);
        quad += (z[i] - chain.a_list[i]).norm_sqr() + chain.c_list[i].iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    log_w -= nf / t * quad;
    let mut vdm = 1.0;
    for p in 0..k {
        for q in p + 1..k {
            vdm *= (z[q] - z[p]).norm_sqr();
        }
    }
    let mut dets = 1.0;
    if n > k {
        let mk = &chain.a_matrices[k] + noise;
        for &zi in z {
            dets *= det(&mk.shifted(zi))?.norm_sqr();
        }
    }
    Ok(vdm * dets * log_w.exp())
}

pub fn kpoint_identity_mc(a: &ComplexMatrix, opts: &KPointOptions) -> Result<KPointEstimate> {
    let n = a.rows();
    let k = opts.centers.len();
    if !a.is_square() || n == 0 {
        return Err(Error::InvalidInput("A must be a nonempty square matrix".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} eigenvalue slots for N = {n}")));
    }
    if !(opts.t > 0.0) || !(opts.radius > 0.0) || opts.samples_lhs < 2 || opts.samples_rhs < 2 {
        return Err(Error::InvalidInput("need t > 0, radius > 0 and at least two samples per side".into()));
    }
    for p in 0..k {
        for q in p + 1..k {
            if (opts.centers[p] - opts.centers[q]).norm() < 2.0 * opts.radius {
                return Err(Error::InvalidInput("k-point disks overlap".into()));
            }
        }
    }
    let area = std::f64::consts::PI * opts.radius * opts.radius;
    let norm = area.powi(k as i32);
    let sqrt_t = opts.t.sqrt();

    let lhs: Vec<f64> = (0..opts.samples_lhs as u64)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let mut rng = stream(opts.seed, s, streams::NOISE_B);
            let m = a + &ginibre(&mut rng, n).scale(C64::new(sqrt_t, 0.0));
            let eigs = eigenvalues_only(&m)?;
            // Disjoint disks: ordered tuples of distinct eigenvalues = product of counts.
            let count: f64 = opts
                .centers
                .iter()
                .map(|c| eigs.iter().filter(|e| (*e - c).norm() < opts.radius).count() as f64)
                .product();
            Ok(count / norm)
        })
        .collect::<Result<_>>()?;

    let rhs: Vec<f64> = (0..opts.samples_rhs as u64)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let mut rng = stream(opts.seed, s, streams::SPHERE);
            let z: Vec<C64> = opts.centers.iter().map(|&c| uniform_disk(&mut rng, c, opts.radius)).collect();
            let v_list: Vec<Vec<C64>> = (0..k).map(|i| uniform_sphere(&mut rng, n - i)).collect();
            let noise = gaussian_matrix(&mut rng, n - k, opts.t / n as f64);
            rhs_sample(a, opts.t, &z, &v_list, &noise)
        })
        .collect::<Result<_>>()?;

    let (l, ls) = mean_stderr(&lhs);
    let (r, rs) = mean_stderr(&rhs);
    let comb = (ls * ls + rs * rs).sqrt();
    let z_score = if comb > 0.0 { (l - r) / comb } else { 0.0 };
    let rel = |m: f64, s: f64| {
        if m.abs() > 0.0 {
            s / m.abs()
        } else {
            f64::INFINITY
        }
    };
    let inconclusive = rel(l, ls) > INCONCLUSIVE_REL_STDERR || rel(r, rs) > INCONCLUSIVE_REL_STDERR;
    Ok(KPointEstimate { lhs: l, lhs_stderr: ls, rhs: r, rhs_stderr: rs, z_score, inconclusive })
}
