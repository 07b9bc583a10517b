mod commands;
mod eval;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::Failure;

#[derive(Parser, Debug)]
#[command(name = "cantor-qc", version, about = "Quasiconformal maps on self-similar Cantor sets")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Dimension of the source Cantor set, in (0, 2).
    #[arg(long, global = true, default_value_t = 1.0)]
    pub t: f64,
    /// Distortion bound, at least 1.
    #[arg(long = "K", global = true, default_value_t = 2.0)]
    #[serde(rename = "K")]
    pub k: f64,
    /// Number of disks in the hexagonal layout.
    #[arg(long, global = true, default_value_t = 100)]
    pub m: usize,
    /// Maximum descent depth when evaluating the map.
    #[arg(long, global = true, default_value_t = 40)]
    pub depth: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Generation used by enumeration-based experiments.
    #[arg(long = "N", global = true, default_value_t = 4)]
    #[serde(rename = "N")]
    pub n: usize,
    /// Sample, pair or trial count; each subcommand has its own default.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Shorthand for --format json.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print the resolved configuration and derived parameters, then exit.
    #[arg(long = "dry-run", global = true)]
    pub dry_run: bool,
}

impl RunConfig {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Derived construction parameters.
    Params {
        /// Choose the smallest m whose image dimension is within this of t'.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Generation-N generating disks.
    Disks {
        #[arg(long, default_value = "source")]
        side: String,
    },
    /// Evaluate the map on a CSV stream of points (`re,im` per line).
    Eval {
        /// Input file; stdin when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Evaluate the inverse map instead.
        #[arg(long)]
        inverse: bool,
        /// Append the Jacobian determinant.
        #[arg(long)]
        jacobian: bool,
    },
    /// Closed-form L^p mass of the Jacobian, optionally with a Monte Carlo check.
    LpMass {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Number of generations in the closed-form series.
        #[arg(long, default_value_t = 30)]
        generations: usize,
        /// Also run the Monte Carlo estimate.
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value = "stratified")]
        sampling: String,
    },
    /// Box-counting dimension of the source and image generation-N centers.
    Dimension {
        #[arg(long, default_value = "both")]
        side: String,
        #[arg(long, default_value_t = 8)]
        per_generation: usize,
    },
    /// Empirical Hölder exponent of the map.
    Holder {
        /// Target exponent; defaults to t/t'.
        #[arg(long)]
        exponent: Option<f64>,
    },
    /// Packing-condition constants over random disks.
    Packing {
        /// Comma-separated exponents; defaults to t and 2t/t'.
        #[arg(long, value_delimiter = ',')]
        exponents: Vec<f64>,
    },
    /// Growth of the Jacobian integral over random disks.
    Growth {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 4.0)]
        cap: f64,
    },
    /// Cauchy-transform counterexample and its numerical witnesses.
    Cauchy {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Include the atom list in the output.
        #[arg(long)]
        atoms: bool,
    },
    /// Glued map over disjoint host disks.
    Glue {
        #[arg(long, default_value_t = 3)]
        pieces: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.run, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Reject(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
