use proptest::prelude::*;
use rand::Rng;
use rmtlab::linalg::{eigenvalues_only, singular_values, ComplexMatrix, C64};
use rmtlab::rng::{complex_normal, ginibre, stream, uniform_sphere};
use rmtlab::schur::{
    assemble, decompose, fix_phase, jacobian, jacobian_finite_difference, kpoint_identity_mc, project_chain,
    schur_step_forward, schur_step_inverse, KPointOptions, SchurChain,
};
use rmtlab::Error;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random(n: usize, seed: u64) -> ComplexMatrix {
    ginibre(&mut stream(seed, 0, 1), n)
}

fn random_vec(n: usize, seed: u64, s: u64) -> Vec<C64> {
    let mut rng = stream(seed, s, 4);
    (0..n).map(|_| complex_normal(&mut rng, 1.0)).collect()
}

fn random_chain(n: usize, k: usize, seed: u64) -> SchurChain {
    let mut rng = stream(seed, 0, 3);
    let mut v_list = Vec::new();
    let mut w_list = Vec::new();
    let mut z_list = Vec::new();
    for i in 0..k {
        let mut v = uniform_sphere(&mut rng, n - i);
        fix_phase(&mut v);
        v_list.push(v);
        w_list.push((0..n - i - 1).map(|_| complex_normal(&mut rng, 1.0)).collect());
        z_list.push(complex_normal(&mut rng, 1.0));
    }
    SchurChain { n, k, z_list, v_list, w_list, m_k: ginibre(&mut rng, n - k) }
}

/// Max distance between two multisets of complex numbers, matched greedily.
fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut left: Vec<C64> = b.to_vec();
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) =
            left.iter().enumerate().map(|(j, y)| (j, (x - y).norm())).min_by(|p, q| p.1.total_cmp(&q.1)).unwrap();
        worst = worst.max(d);
        left.swap_remove(j);
    }
    worst
}

#[test]
fn forward_step_examples() {
    let m = random(3, 1);
    let w = random_vec(3, 1, 0);
    let mut e1 = vec![c(0.0, 0.0); 4];
    e1[0] = c(1.0, 0.0);
    let out = schur_step_forward(c(0.5, 0.5), &e1, &w, &m).unwrap();
    assert_eq!(out[(0, 0)], c(0.5, 0.5));
    for j in 0..3 {
        assert_eq!(out[(0, j + 1)], w[j].conj());
        assert_eq!(out[(j + 1, 0)], c(0.0, 0.0));
    }
    assert_eq!(out.submatrix(1, 1, 3, 3), m);

    let small = schur_step_forward(
        c(1.0, 0.0),
        &[c(1.0, 0.0), c(0.0, 0.0)],
        &[c(0.5, 0.0)],
        &ComplexMatrix::from_real_rows(&[&[0.3]]),
    )
    .unwrap();
    assert_eq!(small, ComplexMatrix::from_real_rows(&[&[1.0, 0.5], &[0.0, 0.3]]));

    let m = random(4, 2);
    let mut v = random_vec(5, 2, 1);
    rmtlab::linalg::normalize(&mut v);
    let z = c(0.7, -0.2);
    let out = schur_step_forward(z, &v, &random_vec(4, 2, 2), &m).unwrap();
    let mut expected = eigenvalues_only(&m).unwrap();
    expected.push(z);
    assert!(spectrum_distance(&eigenvalues_only(&out).unwrap(), &expected) < 1e-9);

    assert!(schur_step_forward(z, &v, &random_vec(3, 2, 2), &m).is_err());
}

#[test]
fn inverse_step_examples() {
    let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.7], &[0.0, 2.0]]);
    let (z, v, w, small) = schur_step_inverse(&m, 0).unwrap();
    assert!((z - c(1.0, 0.0)).norm() < 1e-14);
    assert!((v[0] - c(1.0, 0.0)).norm() < 1e-14 && v[1].norm() < 1e-14);
    assert!((w[0] - c(0.7, 0.0)).norm() < 1e-14);
    assert!((small[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);

    let m = random(4, 3);
    let mut zs = Vec::new();
    for idx in 0..4 {
        let (z, v, w, small) = schur_step_inverse(&m, idx).unwrap();
        assert!(v[0].im == 0.0 && v[0].re >= 0.0);
        let back = schur_step_forward(z, &v, &w, &small).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-9);
        zs.push(z);
    }
    for i in 0..4 {
        for j in i + 1..4 {
            assert!((zs[i] - zs[j]).norm() > 1e-6);
        }
    }

    let jordan = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    assert!(matches!(schur_step_inverse(&jordan, 0), Err(Error::Degenerate { .. })));
    assert!(matches!(schur_step_inverse(&m, 4), Err(Error::InvalidInput(_))));
}

#[test]
fn round_trip_every_selection_on_500_matrices() {
    let mut worst = 0.0f64;
    let mut rng = stream(11, 0, 4);
    for trial in 0..500u64 {
        let n = rng.gen_range(3..=8);
        let m = random(n, 1000 + trial);
        for idx in 0..n {
            let (z, v, w, small) = schur_step_inverse(&m, idx).unwrap();
            assert!((rmtlab::linalg::norm2(&v) - 1.0).abs() < 1e-12);
            assert!(v[0].re >= 0.0 && v[0].im.abs() <= 1e-12);
            let back = schur_step_forward(z, &v, &w, &small).unwrap();
            worst = worst.max(back.max_abs_diff(&m));
        }
    }
    assert!(worst < 1e-9, "worst round trip {worst:e}");
}

#[test]
fn full_decomposition_and_assembly() {
    let m = random(5, 4);
    let chain = decompose(&m, &[4, 0, 2, 1, 0]).unwrap();
    assert_eq!(chain.m_k.rows(), 0);
    assert!(assemble(&chain).unwrap().max_abs_diff(&m) < 1e-9);
    assert!(spectrum_distance(&chain.z_list, &eigenvalues_only(&m).unwrap()) < 1e-9);

    let chain = random_chain(4, 2, 5);
    let t = assemble(&chain).unwrap();
    let mut expected = eigenvalues_only(&chain.m_k).unwrap();
    expected.extend_from_slice(&chain.z_list);
    assert!(spectrum_distance(&eigenvalues_only(&t).unwrap(), &expected) < 1e-9);

    let one = SchurChain { k: 1, ..random_chain(4, 1, 6) };
    let direct = schur_step_forward(one.z_list[0], &one.v_list[0], &one.w_list[0], &one.m_k).unwrap();
    assert_eq!(assemble(&one).unwrap(), direct);

    let mut bad = random_chain(4, 2, 7);
    bad.w_list[1].pop();
    assert!(assemble(&bad).is_err());
}

#[test]
fn chain_json_round_trip() {
    let chain = random_chain(4, 2, 8);
    let back = SchurChain::from_json(&chain.to_json()).unwrap();
    assert_eq!(back, chain);
    let json = chain.to_json().replace("\"k\": 2", "\"k\": 3");
    assert!(SchurChain::from_json(&json).is_err());
}

#[test]
fn jacobian_closed_form_examples() {
    let chain = SchurChain {
        n: 2,
        k: 1,
        z_list: vec![c(1.0, 0.0)],
        v_list: vec![vec![c(1.0, 0.0), c(0.0, 0.0)]],
        w_list: vec![vec![c(0.2, 0.1)]],
        m_k: ComplexMatrix::from_real_rows(&[&[0.3]]),
    };
    assert!((jacobian(&chain).unwrap() - 0.49).abs() < 1e-15);
    let mut twin = random_chain(4, 2, 9);
    twin.z_list[1] = twin.z_list[0];
    assert_eq!(jacobian(&twin).unwrap(), 0.0);
    for seed in 0..20 {
        assert!(jacobian(&random_chain(4, 2, 100 + seed)).unwrap() > 0.0);
    }
}

#[test]
fn finite_difference_jacobian_matches_closed_form() {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (n, k) in [(2usize, 1usize), (2, 2), (3, 1), (3, 2)] {
        for seed in 0..13u64 {
            if count == 50 {
                break;
            }
            count += 1;
            let chain = random_chain(n, k, 200 + seed + 100 * n as u64 + 10 * k as u64);
            let fd = jacobian_finite_difference(&chain, 1e-6).unwrap();
            let exact = jacobian(&chain).unwrap();
            worst = worst.max((fd - exact).abs() / exact);
        }
    }
    assert_eq!(count, 50);
    assert!(worst < 1e-4, "worst relative FD error {worst:e}");
}

#[test]
fn finite_difference_jacobian_two_by_two_case() {
    let chain = random_chain(2, 1, 42);
    let fd = jacobian_finite_difference(&chain, 1e-6).unwrap();
    let exact = jacobian(&chain).unwrap();
    assert!((fd - exact).abs() / exact < 1e-5, "{fd} vs {exact}");
}

#[test]
fn phase_rotation_of_v_leaves_assembly_unchanged() {
    let chain = random_chain(5, 3, 10);
    let base = assemble(&chain).unwrap();
    for (j, phi) in [0.3, 1.7, -2.9].into_iter().enumerate() {
        let mut rotated = chain.clone();
        for v in rotated.v_list.iter_mut() {
            v.iter_mut().for_each(|x| *x *= C64::from_polar(1.0, phi + j as f64));
        }
        assert!(assemble(&rotated).unwrap().max_abs_diff(&base) < 1e-12);
        for v in rotated.v_list.iter_mut() {
            fix_phase(v);
        }
        for (a, b) in rotated.v_list.iter().zip(&chain.v_list) {
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12));
        }
    }
}

#[test]
fn projections_of_a_diagonal_matrix() {
    let d: Vec<C64> = (0..5).map(|j| c(j as f64, -0.5 * j as f64)).collect();
    let a = ComplexMatrix::from_diag(&d);
    let e1 = |n: usize| {
        let mut v = vec![c(0.0, 0.0); n];
        v[0] = c(1.0, 0.0);
        v
    };
    let p = project_chain(&a, &[e1(5), e1(4), e1(3)]).unwrap();
    for i in 0..3 {
        assert_eq!(p.a_list[i], d[i]);
        assert!(p.b_list[i].iter().chain(&p.c_list[i]).all(|x| x.norm() == 0.0));
        assert_eq!(p.a_matrices[i + 1], ComplexMatrix::from_diag(&d[i + 1..]));
    }
}

#[test]
fn projected_singular_values_interlace() {
    let a = random(5, 12);
    let mut rng = stream(12, 1, 3);
    let v_list = vec![uniform_sphere(&mut rng, 5), uniform_sphere(&mut rng, 4)];
    let p = project_chain(&a, &v_list).unwrap();
    assert!(p.recurrence_residual().unwrap() < 1e-12);
    for i in 1..=2 {
        assert_eq!(p.a_matrices[i].rows(), 5 - i);
        let big = singular_values(&p.a_matrices[i - 1]).unwrap();
        let small = singular_values(&p.a_matrices[i]).unwrap();
        // Deleting a row and a column: s_{j+2}(big) ≤ s_j(small) ≤ s_j(big).
        for (j, s) in small.iter().enumerate() {
            assert!(*s <= big[j] + 1e-12);
            if j + 2 < big.len() {
                assert!(*s >= big[j + 2] - 1e-12);
            }
        }
    }
}

#[test]
fn projected_chain_reproduces_the_conjugated_matrix() {
    for seed in 0..10 {
        let a = random(6, 300 + seed);
        let mut rng = stream(300 + seed, 1, 3);
        let v_list: Vec<Vec<C64>> = (0..3).map(|i| uniform_sphere(&mut rng, 6 - i)).collect();
        let p = project_chain(&a, &v_list).unwrap();
        let u = p.unitary().unwrap();
        assert!(u.adjoint_matmul(&u).max_abs_diff(&ComplexMatrix::identity(6)) < 1e-12);
        let uau = u.adjoint_matmul(&a).matmul(&u);
        assert!(p.block_form().unwrap().max_abs_diff(&uau) < 1e-10);
        assert!(p.reassemble().unwrap().max_abs_diff(&a) < 1e-10);
        for i in 0..3 {
            assert!((uau[(i, i)] - p.a_list[i]).norm() < 1e-10);
        }
    }
}

#[test]
fn kpoint_one_point_at_the_origin() {
    let opts = KPointOptions {
        t: 1.0,
        centers: vec![c(0.0, 0.0)],
        radius: 0.1,
        samples_lhs: 400_000,
        samples_rhs: 200_000,
        seed: 21,
    };
    let est = kpoint_identity_mc(&ComplexMatrix::zeros(2, 2), &opts).unwrap();
    // Disk average of the N = 2 Ginibre density (2/π)(1 + 2|z|²) e^{−2|z|²}.
    let r2: f64 = 0.01;
    let exact = (2.0 / std::f64::consts::PI) * (1.0 - (1.0 + r2) * (-2.0 * r2).exp()) / r2;
    assert!(!est.inconclusive, "{est:?}");
    assert!(est.z_score.abs() < 3.0, "{est:?}");
    assert!(est.lhs_stderr / est.lhs < 0.03 && est.rhs_stderr / est.rhs < 0.03, "{est:?}");
    assert!((est.rhs - exact).abs() < 3.0 * est.rhs_stderr, "{est:?} vs {exact}");
}

#[test]
fn kpoint_far_outside_the_support() {
    let opts = KPointOptions {
        t: 1.0,
        centers: vec![c(10.0, 0.0)],
        radius: 0.1,
        samples_lhs: 20_000,
        samples_rhs: 20_000,
        seed: 22,
    };
    let est = kpoint_identity_mc(&ComplexMatrix::zeros(2, 2), &opts).unwrap();
    assert!(est.lhs <= 1e-4 && est.rhs <= 1e-4, "{est:?}");
}

#[test]
fn kpoint_two_point_repulsion() {
    let a = ComplexMatrix::zeros(3, 3);
    let (p, q) = (c(-0.15, 0.0), c(0.15, 0.0));
    let pair = KPointOptions {
        t: 1.0,
        centers: vec![p, q],
        radius: 0.12,
        samples_lhs: 400_000,
        samples_rhs: 200_000,
        seed: 23,
    };
    let est = kpoint_identity_mc(&a, &pair).unwrap();
    let one = |z: C64| {
        kpoint_identity_mc(
            &a,
            &KPointOptions { centers: vec![z], samples_lhs: 50_000, samples_rhs: 50_000, ..pair.clone() },
        )
        .unwrap()
        .rhs
    };
    let product = one(p) * one(q);
    assert!(!est.inconclusive, "{est:?}");
    assert!(est.z_score.abs() < 3.0, "{est:?}");
    assert!(est.lhs < 0.5 * product && est.rhs < 0.5 * product, "{est:?} vs product {product}");
}

#[test]
fn kpoint_rejects_bad_options() {
    let a = ComplexMatrix::zeros(2, 2);
    let base =
        KPointOptions { t: 1.0, centers: vec![c(0.0, 0.0)], radius: 0.1, samples_lhs: 10, samples_rhs: 10, seed: 1 };
    assert!(kpoint_identity_mc(&a, &KPointOptions { t: 0.0, ..base.clone() }).is_err());
    assert!(kpoint_identity_mc(&a, &KPointOptions { centers: vec![c(0.0, 0.0), c(0.1, 0.0)], ..base.clone() }).is_err());
    assert!(kpoint_identity_mc(&a, &KPointOptions { centers: vec![c(0.0, 0.0); 3], ..base }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_property(seed in 0u64..10_000, n in 2usize..7, pick in 0usize..7) {
        let m = random(n, seed);
        let idx = pick % n;
        let (z, v, w, small) = schur_step_inverse(&m, idx).unwrap();
        let back = schur_step_forward(z, &v, &w, &small).unwrap();
        prop_assert!(back.max_abs_diff(&m) < 1e-9);
    }

    #[test]
    fn decompose_then_assemble(seed in 0u64..10_000, n in 2usize..6) {
        let m = random(n, seed);
        let sel: Vec<usize> = (0..n - 1).map(|i| (seed as usize + i) % (n - i)).collect();
        let chain = decompose(&m, &sel).unwrap();
        prop_assert!(assemble(&chain).unwrap().max_abs_diff(&m) < 1e-9);
        prop_assert!(jacobian(&chain).unwrap() > 0.0);
    }
}
