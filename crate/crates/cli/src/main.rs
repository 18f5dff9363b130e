//! `suggestor` — annotation suggestion from tensor files plus a budgeted
//! strategy simulator.
//!
//! Exit codes: 0 success, 1 validation error, 2 I/O error. Diagnostics go to
//! standard error. `SUGGESTOR_THREADS` caps worker threads without ever
//! changing output bytes.

mod commands;
mod config;
mod error;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;
use suggestor_core::suggestion::DEFAULT_ENUMERATION_CAP;

#[derive(Parser)]
#[command(
    name = "suggestor",
    about = "Suggests the most useful images to annotate next",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Greedy suggestion over feature and ensemble-probability tensors.
    Suggest {
        /// Directory of feature-map tensors (height x width x channels), one per image.
        #[arg(long)]
        features: PathBuf,
        /// Directory with one subdirectory per image stem holding that image's
        /// ensemble probability-map tensors (height x width).
        #[arg(long)]
        probs: PathBuf,
        /// Images to suggest.
        #[arg(long)]
        k: usize,
        /// Size of the top-uncertainty candidate pool (defaults to k when omitted).
        #[arg(long = "K")]
        candidates: Option<usize>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the budgeted strategy simulation described by a config file.
    Simulate {
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact selection oracle; prints the optimal objective and greedy ratio.
    Oracle {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        probs: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long = "K")]
        candidates: Option<usize>,
        /// Subset-enumeration cap.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Mean IU and pixel F1 for prediction tensors against ground truth.
    Eval {
        /// Directory of binary prediction tensors (height x width, values 0/1).
        #[arg(long)]
        pred: PathBuf,
        /// Directory of binary ground-truth tensors, paired by sorted name.
        #[arg(long)]
        gt: PathBuf,
    },
}

fn init_thread_pool() -> Result<(), CliError> {
    let Some(raw) = std::env::var_os("SUGGESTOR_THREADS") else {
        return Ok(());
    };
    let text = raw
        .into_string()
        .map_err(|_| CliError::Validation("SUGGESTOR_THREADS is not valid UTF-8".into()))?;
    let threads: usize = text.parse().map_err(|_| {
        CliError::Validation(format!("SUGGESTOR_THREADS must be a positive integer, got {text:?}"))
    })?;
    if threads == 0 {
        return Err(CliError::Validation(
            "SUGGESTOR_THREADS must be at least 1".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Suggest {
            features,
            probs,
            k,
            candidates,
            out,
        } => commands::suggest(&features, &probs, k, candidates.unwrap_or(k), &out),
        Command::Simulate { config } => commands::simulate(&config),
        Command::Oracle {
            features,
            probs,
            k,
            candidates,
            cap,
        } => commands::oracle(&features, &probs, k, candidates.unwrap_or(k), cap),
        Command::Eval { pred, gt } => commands::eval(&pred, &gt),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; anything else is a
            // validation failure.
            return if err.use_stderr() {
                let _ = err.print();
                ExitCode::from(1)
            } else {
                let _ = err.print();
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(err) = init_thread_pool() {
        eprintln!("error: {err}");
        return ExitCode::from(err.exit_code());
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
