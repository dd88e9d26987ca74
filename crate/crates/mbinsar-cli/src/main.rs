//! Command line driver for the multi-baseline InSAR toolkit.
//!
//! All commands read the same JSON experiment configuration and write
//! their artifacts into one output directory, so a full run is
//!
//! ```text
//! mbinsar --config experiment.json simulate
//! mbinsar --config experiment.json unwrap
//! mbinsar --config experiment.json estimate --truth out/truth_heights.csv
//! mbinsar --config experiment.json report
//! ```
//!
//! Exit codes: 0 on success, 1 when the inputs were rejected, 2 when a
//! computation failed. Errors leave a single JSON line on stderr.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::EstimateMode;
use config::{ExperimentConfig, Resolved};
use mbinsar::{Error, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "mbinsar", version, about = "Multi-baseline InSAR simulation and design toolkit")]
struct Cli {
    /// Experiment configuration JSON.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding the config's output_dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Root random seed, overriding the config value.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Monte Carlo trials, overriding the config value.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,

    /// Worker threads; 0 uses the machine default.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a wrapped interferogram stack over the configured scene.
    Simulate,
    /// Run the baseline-chain unwrapping over a simulated stack.
    Unwrap {
        /// Stack manifest; defaults to <out>/stack/stack.json.
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
    },
    /// Sweep the (L1, L2) grid and select the optimal configuration.
    Design,
    /// Estimate heights, orbit parameters and delays from unwrapped fields.
    Estimate {
        /// Stack manifest; defaults to <out>/stack/stack.json.
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        /// Truth heights CSV; accuracy artifacts are produced only when given.
        #[arg(long, value_name = "PATH")]
        truth: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = EstimateMode::Joint)]
        mode: EstimateMode,
    },
    /// Score an estimated height field against truth into plot-ready files.
    Report {
        /// Estimated heights CSV; defaults to <out>/estimate_heights.csv.
        #[arg(long, value_name = "PATH")]
        estimate: Option<PathBuf>,
        /// Truth heights CSV; defaults to <out>/truth_heights.csv.
        #[arg(long, value_name = "PATH")]
        truth: Option<PathBuf>,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return 0;
            }
            emit_error("validation", &err.to_string());
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            if e.is_validation() {
                emit_error("validation", &e.to_string());
                1
            } else {
                emit_error("computation", &e.to_string());
                2
            }
        }
    }
}

/// One JSON object per error so callers can parse stderr mechanically.
fn emit_error(kind: &str, message: &str) {
    let payload = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{payload}");
}

fn dispatch(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::InvalidParameter {
                name: "threads",
                message: e.to_string(),
            })?;
    }
    let config_path = cli.config.ok_or(Error::InvalidParameter {
        name: "config",
        message: "pass --config PATH".into(),
    })?;
    let config = ExperimentConfig::load(&config_path)?;
    let res = Resolved::new(config, cli.out, cli.seed, cli.trials)?;

    match cli.command {
        Command::Simulate => commands::simulate(&res),
        Command::Unwrap { manifest } => commands::unwrap(&res, manifest),
        Command::Design => commands::design(&res),
        Command::Estimate { manifest, truth, mode } => {
            commands::estimate(&res, manifest, truth, mode)
        }
        Command::Report { estimate, truth } => commands::report(&res, estimate, truth),
    }
}
