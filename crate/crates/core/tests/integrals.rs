use rmtlab::integrals::{
    asymptotic_predictors, char_poly_duality_k1, k_contour_formula, k_contour_saddle, k_direct_mc, ln_sphere_volume,
    nu_expectation, product_check_k1, quadratic_form_sphere_integral, sphere_integral_mc, sphere_integral_reduce,
    NuStatistic, TiltedSphereMeasure, TransformDecay,
};
use rmtlab::lab::solve_eta_star;
use rmtlab::linalg::{eigh, ComplexMatrix, C64};
use rmtlab::resolvent::{diagnostics, factorize};
use rmtlab::rng::{ginibre, stream};
use rmtlab::Error;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random(n: usize, seed: u64) -> ComplexMatrix {
    ginibre(&mut stream(seed, 0, 1), n)
}

fn gaussian_f_hat(n: usize) -> impl Fn(f64) -> C64 {
    move |x| C64::new(std::f64::consts::PI.powi(n as i32 - 1), 0.0) / C64::new(1.0, x).powi(n as i32)
}

#[test]
fn sphere_reduction_gaussian_closed_form() {
    for n in [1usize, 2, 4] {
        let r = sphere_integral_reduce(
            gaussian_f_hat(n),
            TransformDecay { power: n as f64, constant: std::f64::consts::PI.powi(n as i32 - 1) },
            1e-11,
        )
        .unwrap();
        let exact = (-1.0f64).exp() * ln_sphere_volume(n).exp();
        assert!((r.value.re - exact).abs() < 1e-8, "N = {n}: {} vs {exact}", r.value.re);
        assert!(r.value.im.abs() < 1e-8);
    }
    let two = (-1.0f64).exp() * 2.0 * std::f64::consts::PI.powi(2);
    assert!((two - 7.2617).abs() < 1e-4);
}

#[test]
fn sphere_reduction_rejects_non_decaying_transforms() {
    let bad = sphere_integral_reduce(|_| C64::new(1.0, 0.0), TransformDecay { power: 0.0, constant: 1.0 }, 1e-10);
    assert!(matches!(bad, Err(Error::Divergence(_))));
    let lying = sphere_integral_reduce(|_| C64::new(1.0, 0.0), TransformDecay { power: 2.0, constant: 1.0 }, 1e-10);
    assert!(matches!(lying, Err(Error::Divergence(_))));
}

#[test]
fn sphere_reduction_matches_monte_carlo_at_n8() {
    let n = 8;
    let x = random(n, 3);
    let b = x.adjoint_matmul(&x).scale(c(2.0, 0.0));
    let eig = eigh(&b).unwrap();
    let formula = quadratic_form_sphere_integral(&eig.values, 1e-12).unwrap();
    let (mc, se) = sphere_integral_mc(
        |v| {
            let bv = b.matvec(v);
            (-v.iter().zip(&bv).map(|(a, b)| (a.conj() * b).re).sum::<f64>()).exp()
        },
        n,
        1_000_000,
        5,
    );
    assert!((formula.value.re - mc).abs() < 3.0 * se, "{} vs {mc} ± {se}", formula.value.re);
    assert!(se / mc < 0.01);
    // Zero eigenvalues are handled through the regularization: B = 0 gives the sphere volume.
    let vol = quadratic_form_sphere_integral(&[0.0; 5], 1e-12).unwrap();
    assert!((vol.value.re / ln_sphere_volume(5).exp() - 1.0).abs() < 1e-9);
}

#[test]
fn k_formula_zero_matrix_closed_form() {
    let (t, n_global) = (0.7f64, 12usize);
    for n in [1usize, 3, 8] {
        let a = ComplexMatrix::zeros(n, n);
        let nf = n_global as f64;
        let exact = -t.ln()
            + 0.5 * (nf / (std::f64::consts::TAU * t)).ln()
            + (n as f64 - 1.0) * (nf / (std::f64::consts::PI * t)).ln()
            + ln_sphere_volume(n);
        // Raw η near the saddle √(n t/N); far from it the p-integral cancels to a tiny value.
        let saddle_eta = (n as f64 * t / n_global as f64).sqrt();
        for eta in [0.8 * saddle_eta, 1.25 * saddle_eta] {
            let k = k_contour_formula(&a, c(0.0, 0.0), eta, t, n_global).unwrap();
            assert!((k.log_value - exact).abs() < 1e-6, "n = {n}, eta = {eta}: {} vs {exact}", k.log_value);
            assert!(k.imag_ratio < 1e-8);
        }
        let k = k_contour_saddle(&a, c(0.0, 0.0), t, n_global).unwrap();
        assert!((k.log_value - exact).abs() < 1e-6, "n = {n}, saddle: {} vs {exact}", k.log_value);
    }
    // Doubling t at A = 0: log K̃ shifts by −(3/2 + n − 1) log 2.
    let a = ComplexMatrix::zeros(8, 8);
    let k1 = k_contour_formula(&a, c(0.0, 0.0), 0.5, 0.4, 8).unwrap().log_value;
    let k2 = k_contour_formula(&a, c(0.0, 0.0), 0.5, 0.8, 8).unwrap().log_value;
    assert!((k2 - k1 + 8.5 * std::f64::consts::LN_2).abs() < 1e-8);
}

#[test]
fn k_formula_matches_sphere_monte_carlo_at_dimension_8() {
    let a = random(8, 7);
    let w = c(0.2, -0.1);
    let (t, n_global) = (2.0, 8usize);
    let k = k_contour_formula(&a, w, 0.8, t, n_global).unwrap();
    let k_other_eta = k_contour_formula(&a, w, 1.7, t, n_global).unwrap();
    assert!((k.log_value - k_other_eta.log_value).abs() < 1e-8);
    let saddle = k_contour_saddle(&a, w, t, n_global).unwrap();
    assert!((k.log_value - saddle.log_value).abs() < 1e-8);
    assert!(k.imag_ratio < 1e-8 && k.value > 0.0);
    let (mc, se) = k_direct_mc(&a, w, t, n_global, 400_000, 9).unwrap();
    assert!(se / mc < 0.01, "relative stderr {}", se / mc);
    assert!((k.value - mc).abs() < 3.0 * se, "{} vs {mc} ± {se}", k.value);
}

#[test]
fn tilted_measure_normalizer() {
    let a = random(5, 8);
    let m = TiltedSphereMeasure::new(&a, c(0.1, 0.0), 0.6, 1.0, 5).unwrap();
    assert!(m.q.iter().all(|q| *q > 0.0));
    assert!(m.log_normalizer.is_finite());
    assert_eq!(m.eigen_basis.rows(), 5);
}

#[test]
fn nu_isotropic_case_is_exact() {
    let a = ComplexMatrix::zeros(6, 6);
    let eta = 0.7;
    let est = nu_expectation(&a, c(0.0, 0.0), eta, 1.0, 6, NuStatistic::AlphaForm, 1000, 1).unwrap();
    assert!((est.mean.re - 1.0 / eta).abs() < 1e-12);
    assert!(est.stderr < 1e-12);
    assert!((est.ess - 1000.0).abs() < 1e-6);
}

#[test]
fn nu_quadratic_forms_concentrate_on_trace_targets() {
    let n = 32;
    let t = 0.5;
    let a = random(n, 10);
    let z = c(0.2, 0.1);
    let f = factorize(&a, z).unwrap();
    let eta = solve_eta_star(&f, t).unwrap().eta_star;
    // The concentration statement allows deviations of order log N/√(N t²) on top of sampling noise.
    let window = (n as f64).ln() / ((n as f64) * t * t).sqrt();
    for stat in [NuStatistic::AlphaForm, NuStatistic::GammaForm, NuStatistic::BetaForm, NuStatistic::DetForm] {
        let est = nu_expectation(&a, z, eta, t, n, stat, 40_000, 11).unwrap();
        assert!(est.ess > 1000.0, "{stat:?}: ess {}", est.ess);
        let dev = (est.mean - est.target).norm();
        assert!(
            dev < 3.0 * est.stderr + window * est.target.norm().max(1.0),
            "{stat:?}: {} vs {} (stderr {})",
            est.mean,
            est.target,
            est.stderr
        );
    }
}

#[test]
fn nu_gamma_form_spread_shrinks_with_n() {
    let spread = |n: usize| {
        let a = random(n, 12);
        let z = c(0.1, 0.0);
        let f = factorize(&a, z).unwrap();
        let eta = solve_eta_star(&f, 0.5).unwrap().eta_star;
        let est = nu_expectation(&a, z, eta, 0.5, n, NuStatistic::GammaForm, 20_000, 13).unwrap();
        // stderr·√ESS estimates the ν standard deviation.
        est.stderr * est.ess.sqrt()
    };
    let (s1, s2) = (spread(16), spread(64));
    let exponent = (s2 / s1).ln() / 4f64.ln();
    assert!(exponent <= -0.3, "measured exponent {exponent}");
}

#[test]
fn duality_scalar_closed_form() {
    let d = char_poly_duality_k1(&ComplexMatrix::zeros(1, 1), c(0.0, 0.0), 0.8, 1, 200_000, 3).unwrap();
    assert!((d.closed_form - 0.8).abs() < 1e-14);
    assert!((d.dual_integral - 0.8).abs() < 1e-6, "{}", d.dual_integral);
    assert!((d.gaussian_mc - 0.8).abs() < 3.0 * d.mc_stderr);
}

#[test]
fn duality_random_n4() {
    let a = random(4, 14);
    let d = char_poly_duality_k1(&a, c(0.3, 0.0), 0.5, 4, 100_000, 15).unwrap();
    assert!((d.dual_integral - d.closed_form).abs() < 1e-8 * d.closed_form);
    assert!((d.gaussian_mc - d.dual_integral).abs() < 3.0 * d.mc_stderr, "{d:?}");
    assert!(d.mc_stderr / d.gaussian_mc < 0.02);
}

#[test]
fn duality_consistent_on_random_configurations() {
    for (seed, n) in [(20u64, 2usize), (21, 3), (22, 5), (23, 6)] {
        let a = random(n, seed);
        let d = char_poly_duality_k1(&a, c(0.1, -0.2), 0.7, n, 40_000, seed).unwrap();
        let comb = (d.mc_stderr.powi(2) + d.quad_error.powi(2)).sqrt();
        assert!((d.gaussian_mc - d.dual_integral).abs() < 3.0 * comb, "n = {n}: {d:?}");
    }
}

#[test]
fn duality_far_from_spectrum() {
    let a = random(4, 16);
    let d = char_poly_duality_k1(&a, c(10.0, 0.0), 0.5, 4, 20_000, 17).unwrap();
    assert!((d.dual_integral / d.deterministic - 1.0).abs() < 0.05);
    assert!((d.gaussian_mc / d.deterministic - 1.0).abs() < 0.05);
}

#[test]
fn psi_and_phi_closed_forms() {
    let t = 0.3;
    let p = asymptotic_predictors(&ComplexMatrix::zeros(6, 6), c(0.0, 0.0), t, &[c(0.0, 0.0)], None).unwrap();
    assert!((p.psi_values[0] - 1.0).abs() < 1e-14);
    assert!((p.eta_star - t.sqrt()).abs() < 1e-12);
    assert!((p.diagnostics.phi.unwrap() - (1.0 - t.ln())).abs() < 1e-12);
    let a = random(16, 18);
    let p = asymptotic_predictors(&a, c(0.1, 0.1), 0.5, &[c(0.0, 0.0), c(0.5, 0.2)], None).unwrap();
    assert!((p.psi_values[0] - 1.0).abs() < 1e-14 && p.psi_values[1] > 0.0);
    assert_eq!(p.log_b.len(), 2);
    let f = factorize(&a, c(0.1, 0.1)).unwrap();
    let d = diagnostics(&f, p.eta_star, Some(0.5)).unwrap();
    assert!((d.sigma - p.diagnostics.sigma).abs() < 1e-14);
}

#[test]
fn product_of_f_and_k_matches_the_ginibre_prediction() {
    let n = 32;
    let a = random(n, 19);
    for (j, zeta) in [c(0.0, 0.0), c(0.4, -0.3), c(-0.8, 0.5)].into_iter().enumerate() {
        let p = product_check_k1(&a, c(0.1, 0.0), 0.5, zeta, 100 + j as u64).unwrap();
        assert!((p.ratio - 1.0).abs() < 0.2, "zeta = {zeta}: ratio {}", p.ratio);
    }
}
