//! `anisojump`: verification suites, oracle comparisons and convergence studies
//! for interface jump relations of anisotropic elliptic problems.
//!
//! Exit codes: 0 pass, 1 verification or solver failure, 2 configuration or I/O error.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, FileConfig, Overrides, RunConfig};

/// Built-in cases: continuous, {isotropic,diagonal,coupled}-{circle,ellipse},
/// variable-{circle,ellipse}, scalar-benchmark, anisotropic-benchmark, no-interface.
/// Variable tensor families for config files: linear-x, graded-coupled, trig-coupled.
#[derive(Debug, Parser)]
#[command(name = "anisojump", version, about, long_about = None)]
struct Cli {
    /// Command to run; may instead come from `command` in the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Built-in manufactured case.
    #[arg(long)]
    case: Option<String>,
    /// TOML config file; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the relations exactly as printed instead of the corrected forms.
    #[arg(long)]
    strict_paper: bool,
    /// Grid size (cells per side); repeat for a convergence study.
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Number of random draws for oracle-fuzz.
    #[arg(long)]
    draws: Option<usize>,
    /// Curve points for verify-relations.
    #[arg(long)]
    points: Option<usize>,
    /// Disable interface corrections in the solver (ablation).
    #[arg(long)]
    no_corrections: bool,
    /// Frame angle in radians for rotate-tensor.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// World tensor entries A11,A12,A22 for rotate-tensor.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tensor: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => FileConfig::default(),
    };
    let tensor = match cli.tensor.as_slice() {
        [] => None,
        [a11, a12, a22] => Some([*a11, *a12, *a22]),
        other => {
            eprintln!(
                "error: --tensor expects A11,A12,A22, got {} values",
                other.len()
            );
            return ExitCode::from(2);
        }
    };
    let flags = Overrides {
        command: cli.command,
        case: cli.case,
        out: cli.out,
        seed: cli.seed,
        strict_paper: cli.strict_paper,
        n: cli.n,
        draws: cli.draws,
        points: cli.points,
        no_corrections: cli.no_corrections,
        theta: cli.theta,
        tensor,
    };
    let cfg = match RunConfig::resolve(file, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&cfg) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
