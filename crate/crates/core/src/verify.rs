//! Fixed-parameter oracle suites behind `rmtlab verify`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::{
    char_poly_duality_k1, k_contour_formula, k_direct_mc, ln_sphere_volume, quadratic_form_sphere_integral,
    sphere_integral_mc, sphere_integral_reduce, TransformDecay,
};
use crate::linalg::{eigh, svd_via_hermitisation, ComplexMatrix, C64};
use crate::resolvent::{
    girko_check, logdet_identity_check, minor_resolvent_check, GaussianBump, GirkoGrid, RadialBump,
};
use crate::rng::{complex_normal, gaussian_matrix, ginibre, stream, uniform_sphere};
use crate::schur::{assemble, decompose, fix_phase, jacobian, jacobian_finite_difference, SchurChain};
use crate::selfconsistent::solve_cubic_m;

pub const SUITES: [&str; 8] = ["schur", "spherical", "kformula", "duality", "mz", "logdet", "girko", "minor"];

/// One comparison; passes when `|lhs − rhs| ≤ tolerance`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyCheck {
    pub suite: String,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(suite: &str, name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> VerifyCheck {
    VerifyCheck { suite: suite.into(), name: name.into(), lhs, rhs, tolerance, pass: (lhs - rhs).abs() <= tolerance }
}

/// Runs a named suite (or `all`).
pub fn run_suite(name: &str) -> Result<Vec<VerifyCheck>> {
    match name {
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s)?);
            }
            Ok(out)
        }
        "schur" => schur(),
        "spherical" => spherical(),
        "kformula" => kformula(),
        "duality" => duality(),
        "mz" => mz(),
        "logdet" => logdet(),
        "girko" => girko(),
        "minor" => minor(),
        _ => Err(Error::InvalidInput(format!("unknown suite '{name}' (expected one of {}, all)", SUITES.join(", ")))),
    }
}

/// Chain with uniform sphere vectors and Gaussian `z`, `w`, `M_k`.
pub fn random_chain(n: usize, k: usize, seed: u64) -> SchurChain {
    let mut rng = stream(seed, 0, crate::rng::streams::SPHERE);
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

fn random(n: usize, seed: u64) -> ComplexMatrix {
    ginibre(&mut stream(seed, 0, crate::rng::streams::MATRIX_A), n)
}

fn schur() -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    let mut count = 0;
    'outer: for (n, k) in [(2usize, 1usize), (2, 2), (3, 1), (3, 2)] {
        for seed in 0..13u64 {
            if count == 50 {
                break 'outer;
            }
            count += 1;
            let chain = random_chain(n, k, 200 + seed + 100 * n as u64 + 10 * k as u64);
            let fd = jacobian_finite_difference(&chain, 1e-6)?;
            let exact = jacobian(&chain)?;
            out.push(check("schur", format!("jacobian_fd n={n} k={k} #{seed}"), fd, exact, 1e-4 * exact));
        }
    }
    for (n, seed) in [(4usize, 1u64), (6, 2), (8, 3)] {
        let m = random(n, 500 + seed);
        let sel: Vec<usize> = (0..n).map(|i| (i * 7 + seed as usize) % (n - i)).collect();
        let back = assemble(&decompose(&m, &sel)?)?;
        out.push(check("schur", format!("round_trip n={n}"), back.max_abs_diff(&m), 0.0, 1e-9));
    }
    Ok(out)
}

fn spherical() -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    for n in [1usize, 2, 4] {
        let c0 = std::f64::consts::PI.powi(n as i32 - 1);
        let r = sphere_integral_reduce(
            |x| C64::new(c0, 0.0) / C64::new(1.0, x).powi(n as i32),
            TransformDecay { power: n as f64, constant: c0 },
            1e-11,
        )?;
        let exact = (ln_sphere_volume(n) - 1.0).exp();
        out.push(check("spherical", format!("gaussian_closed_form n={n}"), r.value.re, exact, 1e-8));
    }
    let n = 8;
    let x = random(n, 3);
    let b = x.adjoint_matmul(&x).scale(C64::new(2.0, 0.0));
    let formula = quadratic_form_sphere_integral(&eigh(&b)?.values, 1e-12)?;
    let (mc, se) = sphere_integral_mc(
        |v| {
            let bv = b.matvec(v);
            (-v.iter().zip(&bv).map(|(a, b)| (a.conj() * b).re).sum::<f64>()).exp()
        },
        n,
        1_000_000,
        5,
    );
    out.push(check("spherical", "quadratic_form_mc n=8", formula.value.re, mc, 3.0 * se));
    Ok(out)
}

fn kformula() -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    let (t, n_global) = (0.7f64, 12usize);
    for n in [1usize, 3, 8] {
        let nf = n_global as f64;
        let exact = -t.ln()
            + 0.5 * (nf / (std::f64::consts::TAU * t)).ln()
            + (n as f64 - 1.0) * (nf / (std::f64::consts::PI * t)).ln()
            + ln_sphere_volume(n);
        let eta = (n as f64 * t / nf).sqrt();
        let k = k_contour_formula(&ComplexMatrix::zeros(n, n), C64::new(0.0, 0.0), eta, t, n_global)?;
        out.push(check("kformula", format!("zero_matrix_log n={n}"), k.log_value, exact, 1e-6));
    }
    let a = random(8, 7);
    let w = C64::new(0.2, -0.1);
    let k = k_contour_formula(&a, w, 0.8, 2.0, 8)?;
    let (mc, se) = k_direct_mc(&a, w, 2.0, 8, 400_000, 9)?;
    out.push(check("kformula", "contour_vs_sphere_mc dim=8", k.value, mc, 3.0 * se));
    Ok(out)
}

fn duality() -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    let d = char_poly_duality_k1(&ComplexMatrix::zeros(1, 1), C64::new(0.0, 0.0), 0.8, 1, 100_000, 3)?;
    out.push(check("duality", "scalar_dual_integral", d.dual_integral, 0.8, 1e-6));
    let a = random(4, 14);
    let d = char_poly_duality_k1(&a, C64::new(0.3, 0.0), 0.5, 4, 100_000, 15)?;
    let comb = (d.mc_stderr.powi(2) + d.quad_error.powi(2)).sqrt();
    out.push(check(
        "duality",
        "dual_integral_vs_closed_form n=4",
        d.dual_integral,
        d.closed_form,
        1e-8 * d.closed_form,
    ));
    out.push(check("duality", "gaussian_mc_vs_dual_integral n=4", d.gaussian_mc, d.dual_integral, 3.0 * comb));
    Ok(out)
}

fn mz() -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    for r in [0.0, 0.3, 0.6, 0.9, 1.2] {
        for eta in [1e-4, 1e-2, 0.5, 10.0] {
            let s = solve_cubic_m(C64::new(r, 0.0), eta)?;
            out.push(check("mz", format!("cubic_residual |z|={r} eta={eta:e}"), s.residual, 0.0, 1e-12));
        }
    }
    for r in [0.2, 0.5, 0.8] {
        let z = C64::new(r, 0.0);
        let k = (1.0 - r * r).sqrt();
        let s = solve_cubic_m(z, 1e-6)?;
        out.push(check("mz", format!("im_m_small_eta |z|={r}"), s.m.im, k, 1e-5));
        let eta = 1e-3;
        let s = solve_cubic_m(z, eta)?;
        out.push(check("mz", format!("u_small_eta |z|={r}"), s.u.re, 1.0 - eta / k, 1e-5));
    }
    Ok(out)
}

fn logdet() -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    for i in 0..20u64 {
        let n = 1 + (i as usize % 8);
        let a = random(n, 600 + i);
        let z = complex_normal(&mut stream(600 + i, 0, 4), 0.25);
        let r = logdet_identity_check(&a, z, 50.0)?;
        out.push(check("logdet", format!("identity n={n} #{i}"), r.lhs, r.rhs_quadrature, 1e-8));
    }
    Ok(out)
}

fn girko() -> Result<Vec<VerifyCheck>> {
    let a = random(3, 11);
    let g = GaussianBump::new(C64::new(0.1, 0.0), 0.4);
    let r = girko_check(&a, &g, GirkoGrid { cells_per_side: 400 })?;
    let zero = girko_check(
        &ComplexMatrix::zeros(2, 2),
        &RadialBump { center: C64::new(0.0, 0.0), radius: 1.0 },
        GirkoGrid { cells_per_side: 200 },
    )?;
    Ok(vec![
        check("girko", "gaussian_bump n=3 grid=400", r.rhs, r.lhs, 1e-2 * r.lhs.abs()),
        check("girko", "radial_bump zero matrix", zero.rhs, zero.lhs, 1e-2 * zero.lhs.abs()),
    ])
}

fn minor() -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    let mut rng = stream(12, 0, 4);
    for (n, k) in [(4usize, 1usize), (5, 2), (6, 3), (8, 2)] {
        let g = gaussian_matrix(&mut rng, n, 1.0);
        let frame = svd_via_hermitisation(&g)?.u.submatrix(0, 0, n, k);
        let a = &ComplexMatrix::identity(n) + &gaussian_matrix(&mut rng, n, 0.1);
        let r = minor_resolvent_check(&a, &frame)?;
        out.push(check("minor", format!("schur_complement n={n} k={k}"), r.residual, 0.0, 1e-10));
    }
    Ok(out)
}
