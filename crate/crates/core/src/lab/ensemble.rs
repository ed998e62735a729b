use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::linalg::eig::sort_lexicographic;
use crate::linalg::{eigenvalues_only, ComplexMatrix, C64};
use crate::rng::{gaussian_matrix, stream, streams};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Everything needed to regenerate a run bit for bit. No wall-clock fields, so reruns
/// produce identical manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub code_version: String,
    pub generator: Generator,
    pub n: usize,
    pub t: f64,
    pub master_seed: u64,
    pub samples: usize,
    /// `A` is drawn once from sample index 0 of the matrix stream and reused.
    pub fixed_a: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailedSample {
    pub sample_index: usize,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleRun {
    pub manifest: RunManifest,
    /// Per sample, sorted by (re, im); `None` when the eigensolver failed.
    pub eigenvalues: Vec<Option<Vec<C64>>>,
    pub failed: Vec<FailedSample>,
}

impl EnsembleRun {
    pub fn n(&self) -> usize {
        self.manifest.n
    }

    pub fn completed(&self) -> impl Iterator<Item = (usize, &[C64])> {
        self.eigenvalues.iter().enumerate().filter_map(|(i, e)| e.as_deref().map(|e| (i, e)))
    }

    pub fn completed_count(&self) -> usize {
        self.eigenvalues.iter().filter(|e| e.is_some()).count()
    }

    /// `sample_index,re,im`, one row per eigenvalue, shortest round-trip formatting.
    pub fn write_eigenvalues_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "sample_index,re,im")?;
        for (i, ev) in self.completed() {
            for z in ev {
                writeln!(out, "{i},{:?},{:?}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Noise matrix `B` for one sample: iid complex N(0, 1/N).
pub fn draw_noise(n: usize, master_seed: u64, sample: usize) -> ComplexMatrix {
    gaussian_matrix(&mut stream(master_seed, sample as u64, streams::NOISE_B), n, 1.0 / n as f64)
}

/// Spectra of `A + √t·B` with `A` drawn once from `generator`.
pub fn sample_ensemble(
    generator: &Generator,
    n: usize,
    t: f64,
    samples: usize,
    master_seed: u64,
) -> Result<EnsembleRun> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("N must be at least 2, got {n}")));
    }
    let a = generator.draw(n, master_seed, 0)?;
    sample_ensemble_with(&a, generator, t, samples, master_seed)
}

/// As [`sample_ensemble`] for an already drawn `A`; `generator` is recorded in the manifest.
pub fn sample_ensemble_with(
    a: &ComplexMatrix,
    generator: &Generator,
    t: f64,
    samples: usize,
    master_seed: u64,
) -> Result<EnsembleRun> {
    let n = a.rows();
    if !a.is_square() || n < 2 {
        return Err(Error::InvalidInput(format!("A must be square with N ≥ 2, got {}x{}", a.rows(), a.cols())));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("t must be nonnegative, got {t}")));
    }
    let st = t.sqrt();
    let results: Vec<std::result::Result<Vec<C64>, String>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let b = draw_noise(n, master_seed, s);
            let mut m = a.clone();
            for (x, y) in m.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += y * st;
            }
            eigenvalues_only(&m)
                .map(|mut ev| {
                    sort_lexicographic(&mut ev);
                    ev
                })
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut failed = Vec::new();
    let eigenvalues = results
        .into_iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok(ev) => Some(ev),
            Err(message) => {
                failed.push(FailedSample { sample_index: i, message });
                None
            }
        })
        .collect();
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        generator: generator.clone(),
        n,
        t,
        master_seed,
        samples,
        fixed_a: true,
    };
    Ok(EnsembleRun { manifest, eigenvalues, failed })
}
