use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rmtlab::lab::{
    estimate_correlation, sample_ensemble, solve_eta_star, universality_experiment, CorrelationEstimate, EnsembleRun,
    ExperimentConfig, RunManifest, MANIFEST_SCHEMA_VERSION,
};
use rmtlab::linalg::C64;
use rmtlab::resolvent::{audit_assumptions, diagnostics, factorize, AuditGrid, AuditThresholds};
use rmtlab::verify::run_suite;
use serde::{Deserialize, Serialize};

use crate::config::{Command, RunConfig};

pub const DEFAULT_WINDOW: f64 = 6.0;
pub const DEFAULT_BINS: usize = 40;
pub const DEFAULT_SAMPLES: usize = 200;
/// Audit grid: η log-spaced on `[AUDIT_ETA_MIN_FACTOR/N, 1]`.
pub const AUDIT_ETA_MIN_FACTOR: f64 = 10.0;
pub const AUDIT_ETA_COUNT: usize = 12;

#[derive(Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    code_version: String,
    /// Resolved configuration; `rmtlab <command> --config manifest.json` reruns it.
    config: RunConfig,
    run: Option<RunManifest>,
    failed_samples: Vec<usize>,
}

type CmdResult = Result<bool, String>;

pub fn run(command: Command, cfg: &RunConfig) -> CmdResult {
    match command {
        Command::Audit => audit(cfg),
        Command::EtaStar => eta_star(cfg),
        Command::Simulate => simulate(cfg),
        Command::Correlate => correlate(cfg),
        Command::Verify => verify(cfg),
        Command::Experiment => experiment(cfg),
    }
}

fn err<E: std::fmt::Display>(ctx: &str) -> impl Fn(E) -> String + '_ {
    move |e| format!("{ctx}: {e}")
}

fn out_dir(cfg: &RunConfig) -> Result<std::path::PathBuf, String> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| format!("out: cannot create {}: {e}", dir.display()))?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, String> {
    let p = dir.join(name);
    File::create(&p).map(BufWriter::new).map_err(|e| format!("cannot write {}: {e}", p.display()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), String> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(err(name))?;
    writeln!(w).and_then(|_| w.flush()).map_err(err(name))
}

/// The configuration as recorded in manifests: defaults filled in, paths of the run itself dropped.
fn recorded(cfg: &RunConfig) -> RunConfig {
    RunConfig { out: None, threads: None, input: None, seed: Some(cfg.seed()), ..cfg.clone() }
}

fn write_manifest(dir: &Path, cfg: &RunConfig, run: Option<&EnsembleRun>) -> Result<(), String> {
    let m = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").into(),
        config: recorded(cfg),
        run: run.map(|r| r.manifest.clone()),
        failed_samples: run.map_or(Vec::new(), |r| r.failed.iter().map(|f| f.sample_index).collect()),
    };
    write_json(dir, "manifest.json", &m)
}

fn audit(cfg: &RunConfig) -> CmdResult {
    let n = cfg.require_n()?;
    let gen = cfg.generator()?;
    let a = gen.draw(n, cfg.seed(), 0).map_err(err("generator"))?;
    if !a.is_finite() {
        return Err("matrix has non-finite entries".into());
    }
    let z = match cfg.z {
        Some(_) => vec![cfg.z()],
        None => {
            vec![C64::new(0.0, 0.0), C64::new(0.3, 0.0), C64::new(0.0, 0.3), C64::new(-0.5, 0.2), C64::new(0.6, -0.3)]
        }
    };
    let grid = AuditGrid::log_spaced(z, AUDIT_ETA_MIN_FACTOR / n as f64, 1.0, AUDIT_ETA_COUNT);
    let d = AuditThresholds::default();
    let th = AuditThresholds { c: cfg.audit_c.unwrap_or(d.c), big_c: cfg.audit_big_c.unwrap_or(d.big_c) };
    let report = audit_assumptions(&a, &grid, th).map_err(err("audit"))?;
    let dir = out_dir(cfg)?;
    let mut w = create(&dir, "audit.csv")?;
    report.write_csv(&mut w).map_err(err("audit.csv"))?;
    w.flush().map_err(err("audit.csv"))?;
    write_json(&dir, "audit_summary.json", &report.summary_json())?;
    let passed = report.cells.iter().filter(|c| c.pass).count();
    println!("audit: {passed}/{} cells pass ({:.1}%)", report.cells.len(), 100.0 * report.pass_fraction);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(passed == report.cells.len())
}

fn eta_star(cfg: &RunConfig) -> CmdResult {
    let n = cfg.require_n()?;
    let t = cfg.require_t()?;
    let a = cfg.generator()?.draw(n, cfg.seed(), 0).map_err(err("generator"))?;
    let f = factorize(&a, cfg.z()).map_err(err("factorize"))?;
    let fp = solve_eta_star(&f, t).map_err(err("eta-star"))?;
    let diag = diagnostics(&f, fp.eta_star, Some(t)).map_err(err("diagnostics"))?;
    let out = serde_json::json!({ "fixed_point": fp, "diagnostics": diag, "config": recorded(cfg) });
    println!("{}", serde_json::to_string_pretty(&out).map_err(err("json"))?);
    if cfg.out.is_some() {
        write_json(&out_dir(cfg)?, "eta_star.json", &out)?;
    }
    Ok(true)
}

fn simulate(cfg: &RunConfig) -> CmdResult {
    let n = cfg.require_n()?;
    let t = cfg.require_t()?;
    let samples = cfg.positive_usize("samples", cfg.samples, DEFAULT_SAMPLES)?;
    let run = sample_ensemble(&cfg.generator()?, n, t, samples, cfg.seed()).map_err(err("simulate"))?;
    let dir = out_dir(cfg)?;
    let mut w = create(&dir, "eigenvalues.csv")?;
    run.write_eigenvalues_csv(&mut w).map_err(err("eigenvalues.csv"))?;
    w.flush().map_err(err("eigenvalues.csv"))?;
    let filled = RunConfig { samples: Some(samples), ..cfg.clone() };
    write_manifest(&dir, &filled, Some(&run))?;
    println!("simulate: {} of {samples} samples written to {}", run.completed_count(), dir.display());
    Ok(true)
}

fn read_eigenvalues(path: &Path, manifest: RunManifest, failed: &[usize]) -> Result<EnsembleRun, String> {
    let file = File::open(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut eigenvalues: Vec<Option<Vec<C64>>> =
        (0..manifest.samples).map(|i| (!failed.contains(&i)).then(Vec::new)).collect();
    for (ln, line) in BufReader::new(file).lines().enumerate().skip(1) {
        let line = line.map_err(err("eigenvalues.csv"))?;
        let bad = || format!("eigenvalues.csv line {}: expected sample_index,re,im", ln + 1);
        let mut parts = line.split(',');
        let (Some(i), Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let i: usize = i.parse().map_err(|_| bad())?;
        let z = C64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?);
        match eigenvalues.get_mut(i) {
            Some(Some(v)) => v.push(z),
            _ => return Err(format!("eigenvalues.csv line {}: sample index {i} not in the manifest", ln + 1)),
        }
    }
    let failed = failed
        .iter()
        .map(|&i| rmtlab::lab::FailedSample { sample_index: i, message: "failed in the original run".into() })
        .collect();
    Ok(EnsembleRun { manifest, eigenvalues, failed })
}

fn write_correlation(dir: &Path, est: Option<&CorrelationEstimate>, k: usize) -> Result<(), String> {
    let name = format!("correlation_k{k}.csv");
    let mut w = create(dir, &name)?;
    match est {
        Some(e) => e.write_bins_csv(&mut w).map_err(err(&name))?,
        None => writeln!(w, "bin_lo,bin_hi,estimate,stderr,reference,z_score").map_err(err(&name))?,
    }
    w.flush().map_err(err(&name))
}

fn correlate(cfg: &RunConfig) -> CmdResult {
    let input = cfg.input.clone().unwrap_or_else(|| cfg.out_dir());
    let text = fs::read_to_string(input.join("manifest.json"))
        .map_err(|e| format!("input: cannot read manifest.json in {}: {e}", input.display()))?;
    let m: Manifest = serde_json::from_str(&text).map_err(err("manifest.json"))?;
    let run_manifest = m.run.ok_or("manifest.json has no run section")?;
    let run = read_eigenvalues(&input.join("eigenvalues.csv"), run_manifest.clone(), &m.failed_samples)?;
    let z = if cfg.z.is_some() { cfg.z() } else { m.config.z() };
    let a = run_manifest.generator.draw(run_manifest.n, run_manifest.master_seed, 0).map_err(err("generator"))?;
    let fp = solve_eta_star(&factorize(&a, z).map_err(err("factorize"))?, run_manifest.t).map_err(err("eta-star"))?;
    let window = cfg.window.unwrap_or(DEFAULT_WINDOW);
    let bins = cfg.positive_usize("bins", cfg.bins, DEFAULT_BINS)?;
    let ks: Vec<usize> = match cfg.k {
        None => vec![1, 2],
        Some(k @ (1 | 2)) => vec![k],
        Some(k) => return Err(format!("k must be 1 or 2, got {k}")),
    };
    let dir = out_dir(cfg)?;
    for k in ks {
        let est = estimate_correlation(&run, k, z, fp.sigma_star, window, bins).map_err(err("correlate"))?;
        write_correlation(&dir, Some(&est), k)?;
        write_json(&dir, &format!("correlation_k{k}.json"), &est)?;
        for w in &est.warnings {
            println!("warning: {w}");
        }
        if let Some(w) = est.window {
            println!("k = 1: density {:.5} ± {:.5} (1/π = {:.5})", w.estimate, w.stderr, w.reference);
        } else {
            println!("k = 2: {} bins, {} points in window", est.bins.len(), est.points_in_window);
        }
    }
    Ok(true)
}

fn verify(cfg: &RunConfig) -> CmdResult {
    let suite = cfg.suite.as_deref().ok_or("missing suite name")?;
    let checks = run_suite(suite).map_err(|e| e.to_string())?;
    let mut ok = true;
    for c in &checks {
        ok &= c.pass;
        println!(
            "{:<4} {:<10} {:<44} lhs = {:<24e} rhs = {:<24e} tol = {:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.lhs,
            c.rhs,
            c.tolerance
        );
    }
    println!("{} of {} checks pass", checks.iter().filter(|c| c.pass).count(), checks.len());
    Ok(ok)
}

fn experiment(cfg: &RunConfig) -> CmdResult {
    let n = cfg.require_n()?;
    let t = cfg.require_t()?;
    let d = ExperimentConfig::default();
    let ecfg = ExperimentConfig {
        generator: cfg.generator()?,
        n,
        t,
        z: cfg.z(),
        window_radius: cfg.window.unwrap_or(d.window_radius),
        bins: cfg.positive_usize("bins", cfg.bins, d.bins)?,
        samples: cfg.positive_usize("samples", cfg.samples, d.samples)?,
        seed: cfg.seed(),
    };
    if !(ecfg.window_radius > 0.0 && ecfg.window_radius.is_finite()) {
        return Err(format!("window must be positive, got {}", ecfg.window_radius));
    }
    let out = universality_experiment(&ecfg).map_err(err("experiment"))?;
    let dir = out_dir(cfg)?;
    let filled = RunConfig {
        window: Some(ecfg.window_radius),
        bins: Some(ecfg.bins),
        samples: Some(ecfg.samples),
        z: Some([ecfg.z.re, ecfg.z.im]),
        ..cfg.clone()
    };
    write_manifest(&dir, &filled, Some(&out.run))?;
    let mut w = create(&dir, "eigenvalues.csv")?;
    out.run.write_eigenvalues_csv(&mut w).map_err(err("eigenvalues.csv"))?;
    w.flush().map_err(err("eigenvalues.csv"))?;
    write_correlation(&dir, out.k1.as_ref(), 1)?;
    write_correlation(&dir, out.k2.as_ref(), 2)?;
    write_json(&dir, "report.json", &out.report)?;

    let r = &out.report;
    if let Some(fp) = &r.fixed_point {
        println!("eta* = {:.6}, sigma* = {:.6}", fp.eta_star, fp.sigma_star);
    }
    for c in &r.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
    match r.pass {
        Some(p) => println!("experiment: {}", if p { "all bands pass" } else { "band failure" }),
        None => println!("experiment: bands not asserted"),
    }
    Ok(r.pass.unwrap_or(true))
}
