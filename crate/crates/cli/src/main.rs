//! `lsteeg`: synthetic data, training, detection, correction, latent
//! analysis, sweeps and PSD evaluation from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use lsteeg_core::Error;

#[derive(Parser)]
#[command(name = "lsteeg", version, about = "LSTM autoencoder for EEG artifact detection and correction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// JSON run configuration (unknown keys are rejected).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset file.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        subjects: Option<usize>,
        #[arg(long)]
        seconds: Option<f64>,
    },
    /// Train a model on a dataset and write a checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        data: PathBuf,
        /// detection or correction
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        max_epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        n_latent: Option<usize>,
    },
    /// Score epochs by reconstruction error and compute the ROC.
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        partition: Option<String>,
    },
    /// Write corrected epochs and an RMSE summary.
    Correct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        partition: Option<String>,
    },
    /// Cumulative activations, MADs, spectral and temporal maps, interpolation.
    AnalyzeLatent {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        partition: Option<String>,
        #[arg(long)]
        mads: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Train one model per hyperparameter value and report test MSE.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset file; generated from the config's synth section when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        /// n_latent, n_outer or n_inner
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long)]
        max_epochs: Option<usize>,
    },
    /// PSD attenuation of the reconstruction relative to its input.
    EvalPsd {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        partition: Option<String>,
    },
}

fn fail(e: &Error) -> ExitCode {
    let body = serde_json::json!({ "class": e.class(), "message": e.to_string() });
    eprintln!("{body}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => return fail(&Error::Usage(e.to_string().trim().to_string())),
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
