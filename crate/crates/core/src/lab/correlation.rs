use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::ensemble::EnsembleRun;
use super::kernel::ginibre_pair_correlation_bin;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Fewer expected pairs than this in the pair range triggers a warning.
pub const MIN_EXPECTED_PAIRS: f64 = 1e3;
/// Pair distances are binned on `[0, PAIR_RANGE_FRACTION · window_radius]`.
pub const PAIR_RANGE_FRACTION: f64 = 2.0 / 3.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    /// Points (k = 1) or ordered pairs (k = 2) that landed in the bin.
    pub count: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub reference: f64,
    pub z_score: f64,
}

impl CorrelationBin {
    pub fn center(&self) -> f64 {
        0.5 * (self.bin_lo + self.bin_hi)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScalarEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub reference: f64,
    pub z_score: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub k: usize,
    pub center: C64,
    pub sigma_star: f64,
    /// `√(Nσ★)`.
    pub rescale: f64,
    pub window_radius: f64,
    pub samples_used: usize,
    pub points_in_window: usize,
    /// k = 1: density over the whole window.
    pub window: Option<ScalarEstimate>,
    /// k = 1: annuli of `[0, R]`; k = 2: pair-distance annuli of `[0, 2R/3]`.
    pub bins: Vec<CorrelationBin>,
    /// k = 2: Poisson expectation of the ordered pair count at the estimated density.
    pub expected_pairs: Option<f64>,
    pub warnings: Vec<String>,
}

impl CorrelationEstimate {
    /// `bin_lo,bin_hi,estimate,stderr,reference,z_score`.
    pub fn write_bins_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_lo,bin_hi,estimate,stderr,reference,z_score")?;
        for b in &self.bins {
            writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?},{:?}",
                b.bin_lo, b.bin_hi, b.estimate, b.stderr, b.reference, b.z_score
            )?;
        }
        Ok(())
    }

    /// Bins whose centers lie in `[lo, hi]`.
    pub fn bins_in(&self, lo: f64, hi: f64) -> impl Iterator<Item = &CorrelationBin> {
        self.bins.iter().filter(move |b| (lo..=hi).contains(&b.center()))
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// `Σ z²` over bins with centers in `[lo, hi]` and finite z-scores, against χ²(dof = bins).
pub fn chi_square(est: &CorrelationEstimate, lo: f64, hi: f64) -> Option<ChiSquare> {
    let z: Vec<f64> = est.bins_in(lo, hi).map(|b| b.z_score).filter(|z| z.is_finite()).collect();
    if z.is_empty() {
        return None;
    }
    let statistic = z.iter().map(|z| z * z).sum::<f64>();
    let dist = ChiSquared::new(z.len() as f64).ok()?;
    Some(ChiSquare { statistic, dof: z.len(), p_value: 1.0 - dist.cdf(statistic) })
}

/// Area of `disk(c, r) ∩ disk(0, big_r)` with `|c| = d`.
pub fn disk_intersection_area(r: f64, d: f64, big_r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if d + r <= big_r {
        return PI * r * r;
    }
    if r >= d + big_r {
        return PI * big_r * big_r;
    }
    if d >= r + big_r {
        return 0.0;
    }
    let c1 = ((d * d + r * r - big_r * big_r) / (2.0 * d * r)).clamp(-1.0, 1.0);
    let c2 = ((d * d + big_r * big_r - r * r) / (2.0 * d * big_r)).clamp(-1.0, 1.0);
    let k = ((-d + r + big_r) * (d + r - big_r) * (d - r + big_r) * (d + r + big_r)).max(0.0);
    r * r * c1.acos() + big_r * big_r * c2.acos() - 0.5 * k.sqrt()
}

/// Ratio `Σ num / Σ den` with its delete-one-sample jackknife standard error.
/// Delete-one-sample jackknife of a statistic; `stat(Some(s))` leaves sample `s` out.
fn jackknife(samples: usize, stat: impl Fn(Option<usize>) -> f64) -> (f64, f64) {
    let theta = stat(None);
    if samples < 2 {
        return (theta, f64::NAN);
    }
    let loo: Vec<f64> = (0..samples).map(|s| stat(Some(s))).map(|x| if x.is_finite() { x } else { theta }).collect();
    let mean = loo.iter().sum::<f64>() / samples as f64;
    let var = (samples - 1) as f64 / samples as f64 * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (theta, var.sqrt())
}

fn total(x: &[f64], skip: Option<usize>) -> f64 {
    x.iter().sum::<f64>() - skip.map_or(0.0, |s| x[s])
}

fn jackknife_ratio(num: &[f64], den: &[f64]) -> (f64, f64) {
    jackknife(num.len(), |skip| {
        let d = total(den, skip);
        if d > 0.0 {
            total(num, skip) / d
        } else {
            f64::NAN
        }
    })
}

fn z_score(estimate: f64, reference: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        (estimate - reference) / stderr
    } else if estimate == reference {
        0.0
    } else {
        f64::INFINITY.copysign(estimate - reference)
    }
}

/// Rescaled k-point statistics of `run` around `z`, on `ζ = √(Nσ★)(λ − z)`, `|ζ| ≤ R`.
///
/// k = 1 is the area density (limit 1/π). k = 2 is the pair correlation
/// `ĝ(r) = ρ̂⁽²⁾/ρ̂²`: ordered pair counts per annulus over `ρ̂ · Σ_i |annulus(ζ_i) ∩ window|`,
/// with `ρ̂` pooled over all samples. A per-sample `(n − 1)/area` would bias ĝ up by about
/// `1/(ρ·area)`, since given one point the rest of the window holds one point fewer on average.
pub fn estimate_correlation(
    run: &EnsembleRun,
    k: usize,
    z: C64,
    sigma_star: f64,
    window_radius: f64,
    bins: usize,
) -> Result<CorrelationEstimate> {
    if k != 1 && k != 2 {
        return Err(Error::InvalidInput(format!("k must be 1 or 2, got {k}")));
    }
    if !(sigma_star > 0.0 && sigma_star.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma_star must be positive, got {sigma_star}")));
    }
    if !(window_radius > 0.0 && window_radius.is_finite()) {
        return Err(Error::InvalidInput(format!("window radius must be positive, got {window_radius}")));
    }
    if bins == 0 {
        return Err(Error::InvalidInput("bins must be at least 1".into()));
    }
    let rescale = (run.n() as f64 * sigma_star).sqrt();
    let r2 = window_radius * window_radius;
    let windows: Vec<Vec<C64>> = run
        .completed()
        .map(|(_, ev)| ev.iter().map(|l| (l - z) * rescale).filter(|p| p.norm_sqr() <= r2).collect())
        .collect();
    let samples_used = windows.len();
    let points_in_window: usize = windows.iter().map(|w| w.len()).sum();
    if points_in_window == 0 {
        return Err(Error::InvalidInput(format!(
            "empty window: no eigenvalues within rescaled radius {window_radius} of z = {z} in {samples_used} samples"
        )));
    }
    let mut warnings = Vec::new();
    if !run.failed.is_empty() {
        warnings.push(format!("{} samples failed and were skipped", run.failed.len()));
    }
    let window_area = PI * r2;

    if k == 1 {
        let width = window_radius / bins as f64;
        let mut counts = vec![vec![0.0; samples_used]; bins];
        for (s, w) in windows.iter().enumerate() {
            for p in w {
                counts[((p.norm() / width) as usize).min(bins - 1)][s] += 1.0;
            }
        }
        let out = counts
            .iter()
            .enumerate()
            .map(|(b, c)| {
                let (lo, hi) = (b as f64 * width, (b + 1) as f64 * width);
                let (estimate, stderr) = jackknife_ratio(c, &vec![PI * (hi * hi - lo * lo); c.len()]);
                CorrelationBin {
                    bin_lo: lo,
                    bin_hi: hi,
                    count: c.iter().sum::<f64>() as usize,
                    estimate,
                    stderr,
                    reference: 1.0 / PI,
                    z_score: z_score(estimate, 1.0 / PI, stderr),
                }
            })
            .collect();
        let counts: Vec<f64> = windows.iter().map(|w| w.len() as f64).collect();
        let (estimate, stderr) = jackknife_ratio(&counts, &vec![window_area; counts.len()]);
        let window =
            ScalarEstimate { estimate, stderr, reference: 1.0 / PI, z_score: z_score(estimate, 1.0 / PI, stderr) };
        return Ok(CorrelationEstimate {
            k,
            center: z,
            sigma_star,
            rescale,
            window_radius,
            samples_used,
            points_in_window,
            window: Some(window),
            bins: out,
            expected_pairs: None,
            warnings,
        });
    }

    let r_max = PAIR_RANGE_FRACTION * window_radius;
    let width = r_max / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|b| b as f64 * width).collect();
    // Per sample and bin: ordered pair counts and the summed clipped annulus areas.
    let mut num = vec![vec![0.0; samples_used]; bins];
    let mut den = vec![vec![0.0; samples_used]; bins];
    for (s, w) in windows.iter().enumerate() {
        for (i, p) in w.iter().enumerate() {
            let d = p.norm();
            let mut prev = 0.0;
            for b in 0..bins {
                let cur = disk_intersection_area(edges[b + 1], d, window_radius);
                den[b][s] += cur - prev;
                prev = cur;
            }
            for (j, q) in w.iter().enumerate() {
                if i == j {
                    continue;
                }
                let r = (p - q).norm();
                if r < r_max {
                    let b = ((r / width) as usize).min(bins - 1);
                    num[b][s] += 1.0;
                }
            }
        }
    }
    let counts: Vec<f64> = windows.iter().map(|w| w.len() as f64).collect();
    let density = |skip: Option<usize>| {
        let used = samples_used - usize::from(skip.is_some());
        total(&counts, skip) / (used as f64 * window_area)
    };
    let expected_pairs: f64 = density(None) * den.iter().flatten().sum::<f64>();
    if expected_pairs < MIN_EXPECTED_PAIRS {
        warnings.push(format!("only {expected_pairs:.0} pairs expected in the pair range; bins will be noisy"));
    }
    let out: Vec<CorrelationBin> = (0..bins)
        .map(|b| {
            let (estimate, stderr) = jackknife(samples_used, |skip| {
                let expected = density(skip) * total(&den[b], skip);
                if expected > 0.0 {
                    total(&num[b], skip) / expected
                } else {
                    f64::NAN
                }
            });
            let reference = ginibre_pair_correlation_bin(edges[b], edges[b + 1]);
            CorrelationBin {
                bin_lo: edges[b],
                bin_hi: edges[b + 1],
                count: num[b].iter().sum::<f64>() as usize,
                estimate,
                stderr,
                reference,
                z_score: z_score(estimate, reference, stderr),
            }
        })
        .collect();
    let degenerate = out.iter().filter(|b| !(b.stderr > 0.0)).count();
    if degenerate > 0 {
        warnings.push(format!("{degenerate} bins have zero jackknife spread; their z-scores are not finite"));
    }
    Ok(CorrelationEstimate {
        k,
        center: z,
        sigma_star,
        rescale,
        window_radius,
        samples_used,
        points_in_window,
        window: None,
        bins: out,
        expected_pairs: Some(expected_pairs),
        warnings,
    })
}
