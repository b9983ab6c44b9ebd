//! `ybip`: verification runner for the independence-preserving maps, their
//! transforms and the associated difference equations.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation breaks down, 2 for usage and configuration errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Validation failures of the core library are configuration errors.
pub fn invalid(e: ybip::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Failures while computing.
pub fn failed(e: ybip::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "ybip", version, about = "Verification runner for independence-preserving maps")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file (`"schema": 1`); flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent. CSV output is appended.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print the effective configuration as a config file and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct DistArgs {
    /// Family: gb2, b2, gb1 or b1.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct MapArgs {
    /// Map: fab, fa-inf, finf-b, fa-zero or gdelta.
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform identities over a grid of (s, θ, σ).
    VerifyTransforms {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated grid values, e.g. "0,0.5,1,2".
        #[arg(long)]
        grid: Option<String>,
        /// Perturb λ in the Y role; the factorization check must then fail.
        #[arg(long, allow_negative_numbers = true)]
        corrupt_lambda: Option<f64>,
    },
    /// Monte Carlo against closed-form transform values.
    VerifyMc {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Conservation, involution, conjugation, Jacobian and limit checks.
    VerifyMaps {
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Independence experiment through one of the maps.
    VerifyIp {
        /// fab, fa-inf, fa-zero, gdelta, dr or negative-control.
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        permutations: Option<usize>,
        #[arg(long)]
        subsample: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        retries: Option<usize>,
        #[arg(long)]
        ks_threshold: Option<f64>,
    },
    /// Difference-equation checks for the U-role transform.
    VerifyHde {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        lattice: Option<usize>,
    },
    /// Euler transformation of 2F1 over random admissible parameters.
    VerifyEuler {
        /// Number of parameter draws.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Draw a sample.
    Sample {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Evaluate a density.
    Density {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: Option<f64>,
    },
    /// Apply a map to one point.
    MapEval {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.common.threads {
        if t == 0 {
            eprintln!("ybip: configuration error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("ybip: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ybip: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
