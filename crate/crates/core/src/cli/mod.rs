//! Command-line front end.
//!
//! `run` executes the full pipeline, `synth` writes a synthetic dataset and
//! `report` re-renders a stored `report.json`. Exit codes: 0 success,
//! 2 configuration or usage error, 3 data error, 4 runtime error,
//! 5 serial and parallel predictions differ.

mod config;
mod pipeline;
mod synth;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    parse_config, parse_grid, Algorithm, ExperimentConfig, FeatureSelection, FileConfig, RunArgs,
    RunMode, DEFAULT_LABEL, DEFAULT_SEED,
};
pub use pipeline::{execute, prepare, run_experiment, write_outputs, Failure, FailureKind};
pub use synth::{generate_synthetic, write_synthetic_csv, write_synthetic_file};

use crate::metrics::{render_text, BenchmarkReport};

#[derive(Debug, Parser)]
#[command(
    name = "parvote",
    version,
    about = "Parallel grid search with majority-vote ensembles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Train a hyperparameter grid serially and/or in parallel and report
    Run(RunArgs),
    /// Write a synthetic Gaussian-blob dataset as CSV
    Synth(SynthArgs),
    /// Print a stored report.json as a text table
    Report { path: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    pub rows: usize,
    #[arg(long, default_value_t = 2)]
    pub features: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    /// Distance between neighbouring class centroids, in noise standard deviations
    #[arg(long, default_value_t = 3.0)]
    pub separation: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "label")]
    pub label: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let config_error = |error| Failure {
        kind: FailureKind::Config,
        error,
    };
    let file = args
        .config
        .as_deref()
        .map(FileConfig::load)
        .transpose()
        .map_err(config_error)?;
    let cfg = parse_config(args, file.as_ref()).map_err(config_error)?;
    let report = run_experiment(&cfg)?;
    print!("{}", render_text(&report));
    println!("outputs written to {}", cfg.out.display());
    Ok(())
}

/// Parses `args` (program name first) and runs the command, returning
/// the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Synth(s) => write_synthetic_file(
            &s.out,
            s.rows,
            s.features,
            s.classes,
            s.separation,
            s.seed,
            &s.label,
        )
        .map_err(|error| Failure {
            kind: match error {
                crate::Error::Io(_) => FailureKind::Runtime,
                _ => FailureKind::Config,
            },
            error,
        }),
        Command::Report { path } => std::fs::read_to_string(path)
            .map_err(crate::Error::from)
            .and_then(|s| BenchmarkReport::from_json(&s))
            .map(|r| print!("{}", render_text(&r)))
            .map_err(|error| Failure {
                kind: FailureKind::Data,
                error,
            }),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("parvote: {f}");
            f.kind.exit_code()
        }
    }
}
