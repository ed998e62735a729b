//! Sources for the deterministic matrix `A`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{read_cmat, ComplexMatrix, C64};
use crate::rng::{bernoulli_matrix, ginibre, stream, streams, uniform_disk};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// iid complex Gaussian entries of variance 1/N.
    Ginibre,
    /// iid `(±1 ± i)/√(2N)` entries.
    Bernoulli,
    Zero,
    /// Diagonal with entries uniform in the disk of the given radius.
    DiagSpread {
        radius: f64,
    },
    /// A fixed matrix read from a CMAT file.
    File {
        path: PathBuf,
    },
}

impl Generator {
    pub fn name(&self) -> String {
        match self {
            Generator::Ginibre => "ginibre".into(),
            Generator::Bernoulli => "bernoulli".into(),
            Generator::Zero => "zero".into(),
            Generator::DiagSpread { .. } => "diag".into(),
            Generator::File { .. } => "file".into(),
        }
    }

    /// Parses `ginibre`, `bernoulli`, `zero`, `diag[:radius]` or `file:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (head, rest) = match spec.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (spec, None),
        };
        match (head, rest) {
            ("ginibre" | "iid" | "gaussian", None) => Ok(Generator::Ginibre),
            ("bernoulli", None) => Ok(Generator::Bernoulli),
            ("zero", None) => Ok(Generator::Zero),
            ("diag", None) => Ok(Generator::DiagSpread { radius: 0.9 }),
            ("diag", Some(r)) => r
                .parse::<f64>()
                .ok()
                .filter(|r| *r >= 0.0 && r.is_finite())
                .map(|radius| Generator::DiagSpread { radius })
                .ok_or_else(|| Error::InvalidInput(format!("generator: bad diag radius '{r}'"))),
            ("file", Some(p)) if !p.is_empty() => Ok(Generator::File { path: PathBuf::from(p) }),
            _ => Err(Error::InvalidInput(format!(
                "generator: unknown '{spec}' (expected ginibre, bernoulli, zero, diag[:radius], file:<path>)"
            ))),
        }
    }

    /// Draws `A` for `(seed, sample)` on the `MATRIX_A` stream.
    pub fn draw(&self, n: usize, seed: u64, sample: u64) -> Result<ComplexMatrix> {
        let mut rng = stream(seed, sample, streams::MATRIX_A);
        match self {
            Generator::Ginibre => Ok(ginibre(&mut rng, n)),
            Generator::Bernoulli => Ok(bernoulli_matrix(&mut rng, n)),
            Generator::Zero => Ok(ComplexMatrix::zeros(n, n)),
            Generator::DiagSpread { radius } => {
                let d: Vec<C64> = (0..n).map(|_| uniform_disk(&mut rng, C64::new(0.0, 0.0), *radius)).collect();
                Ok(ComplexMatrix::from_diag(&d))
            }
            Generator::File { path } => {
                let a = read_cmat(path)?;
                if a.shape() != (n, n) {
                    return Err(Error::DimensionMismatch(format!(
                        "{} holds a {}x{} matrix, expected {n}x{n}",
                        path.display(),
                        a.rows(),
                        a.cols()
                    )));
                }
                Ok(a)
            }
        }
    }
}
