//! `rmtlab`: audits, fixed points, ensemble simulation, correlation estimates and the
//! oracle suites. Exit codes: 0 success, 1 statistical or threshold failure, 2 usage or
//! execution error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_complex, parse_seed, Command, RunConfig};

const FORMATS_HELP: &str = "\
Output files (all under --out):
  manifest.json         schema_version 1, code version, resolved config, run parameters
  eigenvalues.csv       sample_index,re,im
  correlation_k1.csv    bin_lo,bin_hi,estimate,stderr,reference,z_score  (radial density, reference 1/π)
  correlation_k2.csv    bin_lo,bin_hi,estimate,stderr,reference,z_score  (pair correlation, reference 1 − e^{−r²})
  report.json           experiment verdict, band checks, fixed point, warnings
  audit.csv             re_z,im_z,eta,g,alpha,abs_beta,eta_gamma,a2_max,a3_max_scaled,pass
  audit_summary.json    audit ranges, pass fraction, failing cells
See docs/formats.md for details.";

#[derive(Parser)]
#[command(name = "rmtlab", version, about = "Gauss-divisible matrices: assumption audits, fixed points, ensembles and bulk correlations", after_help = FORMATS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the resolvent assumptions of A over a (z, η) grid.
    Audit(Flags),
    /// Solve t⟨H_z(η)⟩ = 1 for A and print η★, σ★.
    EtaStar(Flags),
    /// Sample spectra of A + √t·B.
    Simulate(Flags),
    /// Estimate k = 1 or 2 correlations from a simulate run (--input, default --out).
    Correlate(Flags),
    /// Run an oracle suite: schur, spherical, kformula, duality, mz, logdet, girko, minor, all.
    Verify {
        suite: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Audit, fixed point, sampling and correlation estimates with acceptance bands.
    Experiment(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// ginibre | bernoulli | zero | diag[:radius] | file:<path>
    #[arg(long)]
    generator: Option<String>,
    #[arg(long = "N", id = "N")]
    n: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    /// Spectral parameter: 0.3, 0.3+0.1i or 0.3,0.1
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Window radius in rescaled units.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Master seed, decimal or 0x-hex [default: 0x5EED]
    #[arg(long)]
    seed: Option<String>,
    /// Output directory [default: rmtlab-out]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "RMT_THREADS")]
    threads: Option<usize>,
    /// JSON config with flat keys mirroring the flags (or a manifest.json); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CMAT file holding A.
    #[arg(long)]
    matrix_file: Option<PathBuf>,
    /// Directory of a previous simulate run (correlate).
    #[arg(long)]
    input: Option<PathBuf>,
}

impl Flags {
    fn resolve(self, command: Command, suite: Option<String>) -> Result<RunConfig, String> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let z = self.z.as_deref().map(parse_complex).transpose()?.map(|z| [z.re, z.im]);
        let seed = self.seed.as_deref().map(parse_seed).transpose()?;
        let flags = RunConfig {
            command: Some(command),
            generator: self.generator,
            n: self.n,
            t: self.t,
            z,
            k: self.k,
            window: self.window,
            bins: self.bins,
            samples: self.samples,
            seed,
            out: self.out,
            threads: self.threads,
            matrix_file: self.matrix_file,
            input: self.input,
            suite,
            audit_c: None,
            audit_big_c: None,
        };
        Ok(base.overlay(flags))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags, suite) = match cli.command {
        Cmd::Audit(f) => (Command::Audit, f, None),
        Cmd::EtaStar(f) => (Command::EtaStar, f, None),
        Cmd::Simulate(f) => (Command::Simulate, f, None),
        Cmd::Correlate(f) => (Command::Correlate, f, None),
        Cmd::Verify { suite, flags } => (Command::Verify, flags, Some(suite)),
        Cmd::Experiment(f) => (Command::Experiment, f, None),
    };
    let cfg = match flags.resolve(command, suite) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(threads) = cfg.threads {
        if threads == 0 {
            eprintln!("error: threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(command, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
