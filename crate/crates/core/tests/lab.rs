use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use rmtlab::generator::Generator;
use rmtlab::lab::{
    disk_intersection_area, draw_noise, estimate_correlation, ginibre_kernel, ginibre_pair_correlation,
    ginibre_pair_correlation_bin, sample_ensemble, solve_eta_star, universality_experiment, EnsembleRun,
    ExperimentConfig,
};
use rmtlab::linalg::{ComplexMatrix, C64};
use rmtlab::resolvent::factorize;
use rmtlab::rng::{ginibre, stream, uniform_disk};
use rmtlab::Error;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn eta_star_zero_matrix() {
    for t in [1e-3, 0.1, 1.0, 7.0] {
        let f = factorize(&ComplexMatrix::zeros(5, 5), c(0.0, 0.0)).unwrap();
        let r = solve_eta_star(&f, t).unwrap();
        assert!((r.eta_star - t.sqrt()).abs() < 1e-12 * t.sqrt().max(1.0), "t = {t}");
        assert!(r.residual.abs() <= 1e-14);
        assert!(r.bracket.0 <= r.eta_star && r.eta_star <= r.bracket.1);
        assert!((r.bisection_eta - r.eta_star).abs() <= 1e-10 * r.eta_star);
    }
    let z = c(0.3, -0.4);
    let f = factorize(&ComplexMatrix::zeros(4, 4), z).unwrap();
    let r = solve_eta_star(&f, 0.5).unwrap();
    assert!((r.eta_star - (0.5 - z.norm_sqr()).sqrt()).abs() < 1e-12);
}

#[test]
fn eta_star_no_solution_far_from_spectrum() {
    let f = factorize(&ComplexMatrix::zeros(4, 4), c(3.0, 0.0)).unwrap();
    assert!(matches!(solve_eta_star(&f, 0.5), Err(Error::NoSolution(_))));
    assert!(matches!(solve_eta_star(&f, -1.0), Err(Error::InvalidInput(_))));
}

#[test]
fn eta_star_iid_matrix_at_n512() {
    let (t, z) = (0.4, c(0.3, 0.0));
    let a = ginibre(&mut stream(31, 0, 1), 512);
    let f = factorize(&a, z).unwrap();
    let r = solve_eta_star(&f, t).unwrap();
    let (c1, c2) = (r.bracket.0 / t, r.bracket.1 / t);
    println!(
        "eta* = {:.6} = {:.4} t, final bracket [{c1:.6} t, {c2:.6} t], sigma* = {:.5}",
        r.eta_star,
        r.eta_star / t,
        r.sigma_star
    );
    assert!(r.residual.abs() <= 1e-12);
    assert!(r.eta_star > 0.5 * t && r.eta_star < 1.5 * t);
    // σ★ is the local density of A + √t B in units of N/π, i.e. 1/(1 + t) for iid A.
    assert!((r.sigma_star * (1.0 + t) - 1.0).abs() < 0.05, "sigma* = {}", r.sigma_star);
    // Deviation from 1 is O(η★).
    assert!((r.sigma_star - 1.0).abs() <= r.eta_star);
}

#[test]
fn eta_star_increases_with_t() {
    let a = ginibre(&mut stream(32, 0, 1), 64);
    let f = factorize(&a, c(0.2, 0.1)).unwrap();
    let etas: Vec<f64> = (1..=30).map(|k| solve_eta_star(&f, 0.02 * k as f64).unwrap().eta_star).collect();
    assert!(etas.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn kernel_examples() {
    for z in [c(0.0, 0.0), c(1.3, -2.0), c(-0.5, 4.0)] {
        assert!((ginibre_kernel(&[z]).unwrap().determinant - 1.0 / PI).abs() < 1e-15);
    }
    let z = c(0.7, 0.2);
    assert!(ginibre_kernel(&[z, z]).unwrap().determinant.abs() < 1e-15);
    let d = ginibre_kernel(&[c(0.1, 0.1), c(0.1, 1.1)]).unwrap().determinant;
    assert!((d - (1.0 - (-1.0f64).exp()) / (PI * PI)).abs() < 1e-15);
    assert!((d - 0.064_047_2).abs() < 1e-7);
    for (r, g) in [(0.25, 0.0606), (0.75, 0.4302), (1.5, 0.8946)] {
        assert!((ginibre_pair_correlation(r) - g).abs() < 1e-4);
    }
    assert!(ginibre_kernel(&[]).is_err());
}

#[test]
fn kernel_determinants_are_nonnegative() {
    let mut rng = stream(33, 0, 4);
    for _ in 0..10_000 {
        let k = rng.gen_range(1..=4);
        let pts: Vec<C64> = (0..k).map(|_| uniform_disk(&mut rng, c(0.0, 0.0), 3.0)).collect();
        assert!(ginibre_kernel(&pts).unwrap().determinant >= -1e-12);
    }
}

#[test]
fn pair_correlation_bin_average() {
    let (r1, r2) = (0.3, 0.9);
    let m = 20_000;
    // Midpoint rule in u = r².
    let avg = (0..m)
        .map(|i| {
            let u = r1 * r1 + (r2 * r2 - r1 * r1) * (i as f64 + 0.5) / m as f64;
            ginibre_pair_correlation(u.sqrt())
        })
        .sum::<f64>()
        / m as f64;
    assert!((ginibre_pair_correlation_bin(r1, r2) - avg).abs() < 1e-9);
}

#[test]
fn disk_intersection_matches_sampling() {
    let mut rng = stream(34, 0, 4);
    for (r, d, big) in [(1.0, 0.0, 3.0), (1.0, 2.5, 3.0), (2.0, 2.0, 1.5), (4.0, 1.0, 2.0), (1.0, 5.0, 2.0)] {
        let exact = disk_intersection_area(r, d, big);
        let m = 200_000;
        let hits = (0..m).filter(|_| uniform_disk(&mut rng, c(d, 0.0), r).norm() <= big).count();
        let mc = PI * r * r * hits as f64 / m as f64;
        assert!((exact - mc).abs() < 0.01 * PI * r * r, "r {r} d {d} R {big}: {exact} vs {mc}");
    }
}

#[test]
fn noise_frobenius_moment() {
    let n = 8;
    let v: Vec<f64> = (0..10_000).map(|s| draw_noise(n, 35, s).norm_fro().powi(2)).collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
    assert!((mean - n as f64).abs() < 3.0 * sd / (v.len() as f64).sqrt(), "{mean}");
}

fn csv(run: &EnsembleRun) -> Vec<u8> {
    let mut out = Vec::new();
    run.write_eigenvalues_csv(&mut out).unwrap();
    out
}

#[test]
fn ensemble_is_reproducible() {
    let a = sample_ensemble(&Generator::Zero, 2, 1.0, 50, 7).unwrap();
    let b = sample_ensemble(&Generator::Zero, 2, 1.0, 50, 7).unwrap();
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(a.manifest, b.manifest);
    assert!(a.eigenvalues.iter().all(|e| e.as_ref().unwrap().len() == 2));
    let other = sample_ensemble(&Generator::Zero, 2, 1.0, 50, 8).unwrap();
    assert_ne!(csv(&a), csv(&other));
    assert!(sample_ensemble(&Generator::Zero, 1, 1.0, 5, 7).is_err());
    assert!(sample_ensemble(&Generator::Zero, 4, 1.0, 0, 7).is_err());
}

#[test]
fn ginibre_spectrum_stays_in_the_disk() {
    let n = 512;
    let run = sample_ensemble(&Generator::Zero, n, 1.0, 3, 9).unwrap();
    let edge = 1.0 + 5.0 / (n as f64).sqrt();
    let all: Vec<f64> = run.completed().flat_map(|(_, e)| e.iter().map(|z| z.norm())).collect();
    assert_eq!(all.len(), 3 * n);
    let inside = all.iter().filter(|&&r| r <= edge).count() as f64 / all.len() as f64;
    assert!(inside >= 0.999, "{inside}");
}

#[test]
fn pure_ginibre_reproduces_its_reference() {
    let n = 512;
    let run = sample_ensemble(&Generator::Zero, n, 1.0, 60, 11).unwrap();
    let k1 = estimate_correlation(&run, 1, c(0.0, 0.0), 1.0, 6.0, 40).unwrap();
    let w = k1.window.unwrap();
    assert!(w.z_score.abs() < 3.0, "density {} ± {}", w.estimate, w.stderr);
    assert!(k1.bins.iter().all(|b| b.estimate >= 0.0 && (b.count == 0 || b.stderr > 0.0)));
    let k2 = estimate_correlation(&run, 2, c(0.0, 0.0), 1.0, 6.0, 40).unwrap();
    assert!(k2.bins[0].bin_hi <= 0.1 + 1e-12);
    assert!(k2.bins[0].estimate <= 0.05, "first bin {}", k2.bins[0].estimate);
    for r in [0.25, 0.75, 1.5] {
        let b = k2.bins.iter().find(|b| b.bin_lo <= r && r < b.bin_hi).unwrap();
        assert!(b.z_score.abs() < 3.0, "r = {r}: {} ± {} vs {}", b.estimate, b.stderr, b.reference);
    }
    assert!(k2.bins.iter().all(|b| b.estimate >= 0.0 && (b.count == 0 || b.stderr > 0.0)));
}

#[test]
fn pair_correlation_is_unbiased_in_small_windows() {
    // About 9 points per window: normalizing each sample by its own (n − 1)/area would
    // put ĝ ≈ 9/8 of the reference at large r.
    let run = sample_ensemble(&Generator::Zero, 64, 1.0, 2000, 14).unwrap();
    let k2 = estimate_correlation(&run, 2, c(0.0, 0.0), 1.0, 3.0, 20).unwrap();
    let tail: Vec<f64> = k2.bins_in(1.2, 2.0).map(|b| b.estimate / b.reference).collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    assert!((mean - 1.0).abs() < 0.02, "mean ĝ/g over r in [1.2, 2] = {mean}");
}

#[test]
fn correlation_estimate_is_phase_invariant() {
    let run = sample_ensemble(&Generator::Ginibre, 128, 0.5, 8, 12).unwrap();
    let z = c(0.2, 0.1);
    let phase = C64::from_polar(1.0, 0.7);
    let mut rotated = run.clone();
    for ev in rotated.eigenvalues.iter_mut().flatten() {
        ev.iter_mut().for_each(|l| *l *= phase);
    }
    for k in [1, 2] {
        let a = estimate_correlation(&run, k, z, 0.8, 5.0, 20).unwrap();
        let b = estimate_correlation(&rotated, k, z * phase, 0.8, 5.0, 20).unwrap();
        for (x, y) in a.bins.iter().zip(&b.bins) {
            assert!(
                (x.estimate - y.estimate).abs() <= 1e-12 * x.estimate.abs().max(1.0) || x.count.abs_diff(y.count) <= 2
            );
        }
    }
}

#[test]
fn correlation_rejects_empty_window_and_bad_k() {
    let run = sample_ensemble(&Generator::Zero, 16, 1.0, 4, 13).unwrap();
    assert!(
        matches!(estimate_correlation(&run, 1, c(50.0, 0.0), 1.0, 1.0, 10), Err(Error::InvalidInput(m)) if m.contains("empty window"))
    );
    assert!(estimate_correlation(&run, 3, c(0.0, 0.0), 1.0, 1.0, 10).is_err());
}

#[test]
fn small_pair_counts_warn() {
    let run = sample_ensemble(&Generator::Zero, 32, 1.0, 4, 14).unwrap();
    let k2 = estimate_correlation(&run, 2, c(0.0, 0.0), 1.0, 3.0, 10).unwrap();
    assert!(k2.warnings.iter().any(|w| w.contains("pairs expected")));
}

#[test]
fn experiment_flags_violated_hypotheses() {
    let cfg = ExperimentConfig {
        generator: Generator::DiagSpread { radius: 0.9 },
        n: 1024,
        t: 1e-4,
        samples: 2,
        ..ExperimentConfig::default()
    };
    let out = universality_experiment(&cfg).unwrap();
    assert!(!out.report.hypothesis.satisfied);
    assert_eq!(out.report.pass, None);
    assert!(out.report.warnings.iter().any(|w| w.contains("hypotheses violated")));
    assert_eq!(out.run.completed_count(), 2);
}

#[test]
fn experiment_end_to_end_small() {
    let cfg = ExperimentConfig { n: 128, t: 0.5, samples: 40, seed: 15, ..ExperimentConfig::default() };
    let out = universality_experiment(&cfg).unwrap();
    assert!(out.report.hypothesis.satisfied);
    assert_eq!(out.report.samples_completed, 40);
    assert!(out.report.pass.is_some());
    assert_eq!(out.k2.as_ref().unwrap().bins.len(), 40);
    let again = universality_experiment(&cfg).unwrap();
    assert_eq!(csv(&out.run), csv(&again.run));
    assert_eq!(serde_json::to_string(&out.report).unwrap(), serde_json::to_string(&again.report).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn eta_star_solves_the_fixed_point(seed in 0u64..1000, t in 0.01f64..3.0, zr in -0.8f64..0.8) {
        let a = ginibre(&mut stream(seed, 0, 1), 12);
        let f = factorize(&a, c(zr, 0.1)).unwrap();
        // Small t far from the spectrum has no root; that case is covered separately.
        let r = solve_eta_star(&f, t);
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        prop_assert!(r.residual.abs() <= 1e-12);
        prop_assert!((r.bisection_eta - r.eta_star).abs() <= 1e-10 * r.eta_star);
    }
}
