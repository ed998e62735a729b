//! Sampled residuals of the single and two-resolvent deterministic approximations.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{block_op, block_trace, m1_matrix, mul, solve_cubic_m, stability_operator, Block2};
use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::linalg::C64;
use crate::resolvent::{factorize, trace_pair, trace_single, BlockOp};

/// Exponent of the `N^ε` slack in the reported envelopes.
pub const ENVELOPE_EXPONENT: f64 = 0.1;

const OPS: [BlockOp; 3] = [BlockOp::Identity, BlockOp::E, BlockOp::EAdj];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalLawEntry {
    pub sample: u64,
    /// Master seed; the matrix came from the stream `(seed, sample)`.
    pub seed: u64,
    pub re_z: f64,
    pub im_z: f64,
    pub eta: f64,
    /// `|⟨(G − M⁽¹⁾)B⟩|` for `B = 1, E, E^*`.
    pub residual_single: [f64; 3],
    /// Max over `B₁, B₂ ∈ {1, E, E^*}` of `|⟨G B₁ G B₂⟩ − ⟨M⁽²⁾(B₁) B₂⟩|`.
    pub residual_double: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalLawCell {
    pub re_z: f64,
    pub im_z: f64,
    pub eta: f64,
    /// Medians over samples.
    pub residual_single_i: f64,
    /// Median of `max(|⟨(G − M⁽¹⁾)E⟩|, |⟨(G − M⁽¹⁾)E^*⟩|)`.
    pub residual_single_e: f64,
    pub residual_double: f64,
    pub max_single: f64,
    pub max_double: f64,
    /// `N^{0.1}/(Nη)`.
    pub envelope_single: f64,
    /// `N^{0.1}/(Nη²)`.
    pub envelope_double: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalLawResidualReport {
    pub generator: Generator,
    pub n: usize,
    pub seed: u64,
    pub cells: Vec<LocalLawCell>,
    pub entries: Vec<LocalLawEntry>,
    pub failed_samples: Vec<(u64, String)>,
    pub warnings: Vec<String>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

struct Prediction {
    m1: Block2,
    m2: [Block2; 3],
}

pub fn measure_local_law(
    generator: &Generator,
    n: usize,
    z_grid: &[C64],
    eta_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<LocalLawResidualReport> {
    if n < 2 || samples == 0 || z_grid.is_empty() || eta_grid.is_empty() {
        return Err(Error::InvalidInput("need N ≥ 2, at least one sample and a nonempty grid".into()));
    }
    if eta_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidInput("η values must be positive".into()));
    }
    let mut warnings = Vec::new();
    if n < 32 {
        warnings.push(format!("N = {n} is below 32; local-law envelopes are not meaningful"));
    }
    let floor = (n as f64).powf(-1.0 + 0.01);
    if eta_grid.iter().any(|&e| e < floor) {
        warnings.push(format!("some η are below N^(-0.99) = {floor:.3e}"));
    }
    // Deterministic side, once per grid cell.
    let mut preds = Vec::with_capacity(z_grid.len() * eta_grid.len());
    for &z in z_grid {
        for &eta in eta_grid {
            let sol = solve_cubic_m(z, eta)?;
            let op = stability_operator(z, eta, eta)?;
            preds.push(Prediction { m1: m1_matrix(&sol), m2: OPS.map(|b| op.m2(&block_op(b))) });
        }
    }
    let per_sample: Vec<std::result::Result<Vec<LocalLawEntry>, (u64, String)>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let a = generator.draw(n, seed, s).map_err(|e| (s, e.to_string()))?;
            let mut out = Vec::with_capacity(preds.len());
            for (iz, &z) in z_grid.iter().enumerate() {
                let f = factorize(&a, z).map_err(|e| (s, e.to_string()))?;
                for (ie, &eta) in eta_grid.iter().enumerate() {
                    let p = &preds[iz * eta_grid.len() + ie];
                    let residual_single =
                        OPS.map(|b| (trace_single(&f, eta, b) - block_trace(&mul(&p.m1, &block_op(b)))).norm());
                    let mut residual_double: f64 = 0.0;
                    for (i1, &b1) in OPS.iter().enumerate() {
                        for &b2 in &OPS {
                            let got = trace_pair(&f, (eta, b1), (eta, b2));
                            let want = block_trace(&mul(&p.m2[i1], &block_op(b2)));
                            residual_double = residual_double.max((got - want).norm());
                        }
                    }
                    out.push(LocalLawEntry {
                        sample: s,
                        seed,
                        re_z: z.re,
                        im_z: z.im,
                        eta,
                        residual_single,
                        residual_double,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut entries = Vec::new();
    let mut failed_samples = Vec::new();
    for r in per_sample {
        match r {
            Ok(e) => entries.extend(e),
            Err(f) => failed_samples.push(f),
        }
    }
    let nf = n as f64;
    let slack = nf.powf(ENVELOPE_EXPONENT);
    let mut cells = Vec::new();
    for &z in z_grid {
        for &eta in eta_grid {
            let here: Vec<&LocalLawEntry> =
                entries.iter().filter(|e| e.re_z == z.re && e.im_z == z.im && e.eta == eta).collect();
            cells.push(LocalLawCell {
                re_z: z.re,
                im_z: z.im,
                eta,
                residual_single_i: median(here.iter().map(|e| e.residual_single[0]).collect()),
                residual_single_e: median(
                    here.iter().map(|e| e.residual_single[1].max(e.residual_single[2])).collect(),
                ),
                residual_double: median(here.iter().map(|e| e.residual_double).collect()),
                max_single: here.iter().flat_map(|e| e.residual_single).fold(0.0, f64::max),
                max_double: here.iter().map(|e| e.residual_double).fold(0.0, f64::max),
                envelope_single: slack / (nf * eta),
                envelope_double: slack / (nf * eta * eta),
                samples: here.len(),
            });
        }
    }
    Ok(LocalLawResidualReport { generator: generator.clone(), n, seed, cells, entries, failed_samples, warnings })
}

impl LocalLawResidualReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "re_z,im_z,eta,residual_single_I,residual_single_E,residual_double,envelope_single,envelope_double,samples"
        )?;
        for c in &self.cells {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                c.re_z,
                c.im_z,
                c.eta,
                c.residual_single_i,
                c.residual_single_e,
                c.residual_double,
                c.envelope_single,
                c.envelope_double,
                c.samples
            )?;
        }
        Ok(())
    }
}
