use approx::assert_relative_eq;
use proptest::prelude::*;
use rmtlab::linalg::{eigvalsh, singular_values, ComplexMatrix, C64};
use rmtlab::resolvent::{self, dense, BlockOp, GaussianBump, GirkoGrid, RadialBump};
use rmtlab::rng::{ginibre, stream};

fn random(n: usize, seed: u64) -> ComplexMatrix {
    ginibre(&mut stream(seed, 0, 1), n)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn hermitisation_spectrum_is_plus_minus_singular_values() {
    let a = random(4, 1);
    let z = C64::new(0.3, 0.0);
    let h = resolvent::hermitise(&a, z);
    assert_eq!(h.hermitian_defect(), 0.0);
    let ev = eigvalsh(&h).unwrap();
    let s = singular_values(&a.shifted(z)).unwrap();
    for (k, sk) in s.iter().enumerate() {
        assert!((ev[7 - k] - sk).abs() < 1e-10 && (ev[k] + sk).abs() < 1e-10);
    }
    let one = ComplexMatrix::from_real_rows(&[&[1.0]]);
    assert_eq!(resolvent::hermitise(&one, C64::new(1.0, 0.0)).norm_max(), 0.0);
}

#[test]
fn factorization_basics() {
    let f = resolvent::factorize(&ComplexMatrix::zeros(3, 3), C64::new(0.0, 0.0)).unwrap();
    assert!(f.s.iter().all(|&s| s == 0.0));
    let d = ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 0.0]]);
    let f = resolvent::factorize(&d, C64::new(0.0, 0.0)).unwrap();
    assert!((f.s[0] - 2.0).abs() < 1e-14 && f.s[1].abs() < 1e-14);
    let f = resolvent::factorize(&random(12, 2), C64::new(0.1, -0.2)).unwrap();
    let wtw = f.w.adjoint_matmul(&f.w);
    assert!(wtw.max_abs_diff(&ComplexMatrix::identity(12)) < 1e-10);
}

#[test]
fn zero_matrix_closed_form() {
    let f = resolvent::factorize(&ComplexMatrix::zeros(4, 4), C64::new(0.0, 0.0)).unwrap();
    let eta = 0.3;
    let d = resolvent::diagnostics(&f, eta, None).unwrap();
    assert_relative_eq!(d.g, 1.0 / eta, max_relative = 1e-14);
    assert_relative_eq!(d.alpha, 1.0 / (eta * eta), max_relative = 1e-14);
    assert_relative_eq!(d.gamma, 1.0 / (eta * eta), max_relative = 1e-14);
    assert_relative_eq!(d.sigma, 1.0 / (eta * eta), max_relative = 1e-14);
    assert_eq!(d.beta.norm(), 0.0);
    assert!(resolvent::diagnostics(&f, 0.0, None).is_err());
    assert!(resolvent::diagnostics(&f, -1.0, None).is_err());
}

#[test]
fn diagnostics_match_dense_inverse() {
    for (seed, n) in [(3u64, 5usize), (4, 6), (5, 9), (6, 16)] {
        let a = random(n, seed);
        let z = C64::new(0.25, 0.1);
        for eta in [0.05, 0.7, 3.0] {
            let f = resolvent::factorize(&a, z).unwrap();
            let d = resolvent::diagnostics(&f, eta, Some(0.4)).unwrap();
            let o = dense::diagnostics(&a, z, eta, Some(0.4)).unwrap();
            assert!(rel(d.g, o.g) < 1e-10, "g {} {}", d.g, o.g);
            assert!(rel(d.alpha, o.alpha) < 1e-10, "alpha {} {}", d.alpha, o.alpha);
            assert!(rel(d.gamma, o.gamma) < 1e-10, "gamma {} {}", d.gamma, o.gamma);
            assert!((d.beta - o.beta).norm() < 1e-10 * o.beta.norm().max(1.0), "beta {} {}", d.beta, o.beta);
            assert!((d.delta - o.delta).norm() < 1e-10 * o.delta.norm().max(1.0), "delta {} {}", d.delta, o.delta);
            assert!((d.phi.unwrap() - o.phi.unwrap()).abs() < 1e-10);
            assert!((d.tau - o.tau).norm() < 1e-9 * o.tau.norm().max(1.0));
            assert_eq!(d.sigma, d.alpha + d.beta.norm_sqr() / d.gamma);
        }
    }
}

#[test]
fn beta_orientation_is_not_conjugated() {
    // A nonnormal example where β has a sizeable imaginary part.
    let shift = ComplexMatrix::from_fn(6, 6, |i, j| if j == i + 1 { C64::new(0.0, 1.5) } else { C64::new(0.0, 0.0) });
    let a = &random(6, 7) + &shift;
    let z = C64::new(0.2, 0.3);
    let f = resolvent::factorize(&a, z).unwrap();
    let d = resolvent::diagnostics(&f, 0.4, None).unwrap();
    let o = dense::diagnostics(&a, z, 0.4, None).unwrap();
    assert!(d.beta.im.abs() > 1e-3);
    assert!((d.beta - o.beta).norm() < 1e-10);
    assert!((d.beta.conj() - o.beta).norm() > 1e-4);
}

#[test]
fn trace_chains_match_dense() {
    let a = random(7, 8);
    let z = C64::new(-0.3, 0.2);
    let f = resolvent::factorize(&a, z).unwrap();
    let ops = [BlockOp::Identity, BlockOp::E, BlockOp::EAdj];
    for &b1 in &ops {
        let s = resolvent::trace_single(&f, 0.6, b1);
        let o = dense::trace_chain(&a, z, &[(0.6, b1)]).unwrap();
        assert!((s - o).norm() < 1e-12, "{b1:?}");
        for &b2 in &ops {
            let p = resolvent::trace_pair(&f, (0.6, b1), (0.9, b2));
            let o = dense::trace_chain(&a, z, &[(0.6, b1), (0.9, b2)]).unwrap();
            assert!((p - o).norm() < 1e-11 * o.norm().max(1.0), "{b1:?} {b2:?}: {p} {o}");
            for &b3 in &ops {
                let chain = [(0.6, b1), (0.9, b2), (1.3, b3)];
                let c = resolvent::trace_chain(&f, &chain);
                let o = dense::trace_chain(&a, z, &chain).unwrap();
                assert!((c - o).norm() < 1e-11 * o.norm().max(1.0), "{b1:?} {b2:?} {b3:?}");
            }
        }
    }
    let chain = [(0.5, BlockOp::E), (0.5, BlockOp::E), (0.7, BlockOp::EAdj), (0.5, BlockOp::E)];
    let c = resolvent::trace_chain(&f, &chain);
    let o = dense::trace_chain(&a, z, &chain).unwrap();
    assert!((c - o).norm() < 1e-11 * o.norm().max(1.0));
}

#[test]
fn mean_h_is_strictly_decreasing() {
    let f = resolvent::factorize(&random(20, 9), C64::new(0.1, 0.1)).unwrap();
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let eta = 1e-3 * 1.05f64.powi(k);
        let h = f.mean_h(eta);
        assert!(h < prev && f.mean_h_derivative(eta) < 0.0);
        prev = h;
    }
}

#[test]
fn logdet_identity() {
    let d = ComplexMatrix::from_real_rows(&[&[2.0]]);
    let r = resolvent::logdet_identity_check(&d, C64::new(0.0, 0.0), 10.0).unwrap();
    assert!(r.residual <= 1e-10, "{r:?}");
    let r = resolvent::logdet_identity_check(&random(4, 10), C64::new(0.1, 0.0), 50.0).unwrap();
    assert!(r.residual <= 1e-8, "{r:?}");
    let one = ComplexMatrix::identity(3);
    assert!(matches!(
        resolvent::logdet_identity_check(&one, C64::new(1.0, 0.0), 5.0),
        Err(rmtlab::Error::Singular { .. })
    ));
}

#[test]
fn girko_formula() {
    let zero = ComplexMatrix::zeros(2, 2);
    let bump = RadialBump { center: C64::new(0.0, 0.0), radius: 1.0 };
    let r = resolvent::girko_check(&zero, &bump, GirkoGrid { cells_per_side: 200 }).unwrap();
    assert!((r.lhs - 2.0).abs() < 1e-14);
    assert!(r.residual <= 1e-2 * r.lhs.abs(), "{r:?}");

    let far = RadialBump { center: C64::new(5.0, 5.0), radius: 1.0 };
    let a = random(3, 11);
    let r = resolvent::girko_check(&a, &far, GirkoGrid { cells_per_side: 100 }).unwrap();
    assert!(r.lhs == 0.0 && r.rhs.abs() < 1e-6, "{r:?}");

    let g = GaussianBump::new(C64::new(0.1, 0.0), 0.4);
    let r = resolvent::girko_check(&a, &g, GirkoGrid { cells_per_side: 400 }).unwrap();
    assert!(r.residual <= 1e-2 * r.lhs.abs(), "{r:?}");
}

#[test]
fn minor_resolvent() {
    let mut rng = stream(12, 0, 4);
    let frame = |n: usize, k: usize, rng: &mut _| {
        let g = rmtlab::rng::gaussian_matrix(rng, n, 1.0);
        let s = rmtlab::linalg::svd_via_hermitisation(&g).unwrap();
        s.u.submatrix(0, 0, n, k)
    };
    let id = ComplexMatrix::identity(5);
    let u = frame(5, 2, &mut rng);
    let r = resolvent::minor_resolvent_check(&id, &u).unwrap();
    assert!(r.residual <= 1e-12);

    let c = rmtlab::rng::gaussian_matrix(&mut rng, 6, 1.0);
    let herm = (&c + &c.adjoint()).scale(C64::new(0.5, 0.0));
    let a = &ComplexMatrix::identity(6) + &herm.scale(C64::new(0.0, 1.0));
    let r = resolvent::minor_resolvent_check(&a, &frame(6, 1, &mut rng)).unwrap();
    assert!((r.norm_bound.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r.bound_holds, Some(true));
    let r = resolvent::minor_resolvent_check(&a, &frame(6, 2, &mut rng)).unwrap();
    assert!(r.residual <= 1e-10, "{r:?}");
}

#[test]
fn fischer_inequality_on_random_psd() {
    let mut rng = stream(13, 0, 4);
    for trial in 0..1000 {
        let n = 2 + trial % 6;
        let x = rmtlab::rng::gaussian_matrix(&mut rng, n, 1.0);
        let psd = x.adjoint_matmul(&x);
        let split = 1 + trial % (n - 1);
        let r = resolvent::fischer_check(&psd, &[split, n - split]).unwrap();
        assert!(r.holds, "{r:?}");
    }
}

#[test]
fn audit_flags_unbounded_g() {
    let zero = ComplexMatrix::zeros(4, 4);
    let grid = resolvent::AuditGrid::log_spaced(vec![C64::new(0.0, 0.0)], 1e-3, 1.0, 6);
    let rep = resolvent::audit_assumptions(&zero, &grid, Default::default()).unwrap();
    let first = &rep.cells[0];
    assert!(!first.pass && first.failures.iter().any(|f| f.starts_with("g=")));
    assert!(rep.cells.last().unwrap().pass);
}

#[test]
fn audit_marks_near_singular_cell() {
    let mut d = ComplexMatrix::identity(8);
    d[(0, 0)] = C64::new(1e-8, 0.0);
    let grid = resolvent::AuditGrid::log_spaced(vec![C64::new(0.0, 0.0)], 1e-6, 1.0, 5);
    let rep = resolvent::audit_assumptions(&d, &grid, Default::default()).unwrap();
    assert!(rep.cells.iter().any(|c| c.failures.iter().any(|f| f.starts_with("eta_gamma"))));
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("re_z,im_z,eta,g,alpha,abs_beta,eta_gamma,a2_max,a3_max_scaled,pass\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn audit_iid_sample_is_inside_band() {
    let n = 256;
    let a = random(n, 14);
    let eta = 1.0 / (n as f64).sqrt();
    let mut grid = resolvent::AuditGrid::log_spaced(vec![C64::new(0.3, 0.0)], eta, 1.0, 4);
    grid.four_resolvent = true;
    let rep = resolvent::audit_assumptions(&a, &grid, Default::default()).unwrap();
    assert!(rep.pass_fraction >= 0.99, "{:#}", rep.summary_json());
    assert!(rep.four_resolvent_exponent.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn g_matches_dense_and_gz_is_real(seed in 0u64..1000, n in 2usize..10, re in -1.0f64..1.0, im in -1.0f64..1.0, eta in 0.01f64..5.0, wr in -1.0f64..1.0, wi in -1.0f64..1.0) {
        let a = random(n, seed);
        let z = C64::new(re, im);
        let f = resolvent::factorize(&a, z).unwrap();
        let d = resolvent::diagnostics(&f, eta, None).unwrap();
        let g = dense::resolvent(&a, z, eta).unwrap();
        let g_dense = 0.5 * g.trace().im / n as f64;
        prop_assert!(rel(d.g, g_dense) < 1e-10);
        prop_assert!(d.g > 0.0 && d.gamma > 0.0 && d.alpha >= 0.0);
        let gz = resolvent::trace_z(&f, eta, C64::new(wr, wi));
        prop_assert!(gz.im.abs() <= 1e-12 * gz.re.abs().max(1.0));
    }
}
