//! `weylcert <command> --config <path> [--out <dir>] [--threads <k>]`
//!
//! The config names its command too; the two must agree, which catches
//! the classic mistake of pointing a subcommand at the wrong file.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, ExperimentConfig};
use runner::Runner;

#[derive(Parser)]
#[command(name = "weylcert", version, about = "Batch experiments on second-order difference operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `out` key, then ".".
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid fan-out.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the recurrence at one λ and dump the overflow-safe solution.
    Solve(RunArgs),
    /// Eigenvalues of the N-site finite section.
    Spectrum(RunArgs),
    /// Hypothesis checks: weight variation, growth, limit-point test.
    Classify(RunArgs),
    /// Optimized spectral-distance certificates over a λ grid.
    Shnol(RunArgs),
    /// Growth-based candidate set with distances to the section spectrum.
    Scan(RunArgs),
    /// Essential-spectrum stability under relatively vanishing perturbations.
    Perturb(RunArgs),
    /// Preset pipeline for the built-in wimp model.
    Wimp(RunArgs),
}

impl Command {
    fn parts(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Solve(a) => (CommandKind::Solve, a),
            Command::Spectrum(a) => (CommandKind::Spectrum, a),
            Command::Classify(a) => (CommandKind::Classify, a),
            Command::Shnol(a) => (CommandKind::Shnol, a),
            Command::Scan(a) => (CommandKind::Scan, a),
            Command::Perturb(a) => (CommandKind::Perturb, a),
            Command::Wimp(a) => (CommandKind::Wimp, a),
        }
    }
}

fn real_main() -> Result<i32, String> {
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();
    let config = ExperimentConfig::load(&args.config).map_err(|e| e.to_string())?;
    if config.command != kind {
        return Err(format!(
            "config names command `{}` but `{}` was invoked",
            config.command.name(),
            kind.name()
        ));
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let runner = Runner::new(config, out_dir, args.threads);
    runner.run().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
