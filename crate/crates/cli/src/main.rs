//! `dynhedge` command-line front end.

mod commands;
mod manifest;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use dynhedge::par::Execution;

use commands::RunContext;
use settings::{Settings, KEYS_HELP};

#[derive(Parser, Debug)]
#[command(name = "dynhedge", version, about = "Signal-timed credit ETF hedging", after_help = KEYS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory holding the CSV dataset bundle.
    #[arg(long, global = true, default_value = "data")]
    data_dir: PathBuf,

    /// Where artifacts are written.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Seed for the synthetic market generator.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override a configuration key, e.g. `--set lookback=40`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the three signals and their orthogonality report.
    Signals,
    /// Run one backtest and summarize it against the unhedged fund.
    Backtest,
    /// Staged search over lookback, entry and exit thresholds.
    Gridsearch {
        /// Also score every combination into heatmap.csv.
        #[arg(long)]
        heatmap: bool,
    },
    /// Re-run the backtest with execution delayed by each configured lag.
    Lags,
    /// Write a seeded synthetic dataset bundle to the output directory.
    Synth,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(de) = cause.downcast_ref::<dynhedge::Error>() {
            return if de.is_input_error() { 1 } else { 2 };
        }
    }
    1
}

/// The error chain joined by `: `, skipping causes whose text the previous
/// message already includes.
fn render(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !last.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
        last = msg;
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    let mut settings = Settings::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    let ctx = RunContext {
        settings,
        config_path: cli.config,
        data_dir: cli.data_dir,
        out_dir: cli.out_dir,
        exec: if cli.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    match cli.command {
        Command::Signals => commands::signals(&ctx),
        Command::Backtest => commands::backtest(&ctx),
        Command::Gridsearch { heatmap } => commands::gridsearch(&ctx, heatmap),
        Command::Lags => commands::lags(&ctx),
        Command::Synth => commands::synth(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
