//! `commscore` command-line pipeline.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::CliError;
use crate::config::{apply_override, load_file, RunConfig};

#[derive(Parser)]
#[command(name = "commscore", version, about = "Score community detection against text classification")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build the undirected graph and node map from a directed edge list.
    Ingest,
    /// Run every configured algorithm and parameter, writing partitions.
    Detect,
    /// Train the ensemble on anchors and score agreement with each partition.
    Evaluate,
    /// Sweep parameter grids into dendrograms.
    Sweep,
    /// Generate the synthetic benchmark.
    Synth,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut map = match &cli.config {
        Some(p) => load_file(p)?,
        None => Default::default(),
    };
    for s in &cli.set {
        apply_override(&mut map, s)?;
    }
    if let Some(out) = &cli.out {
        map.insert("out".into(), out.display().to_string());
    }
    if let Some(seed) = cli.seed {
        map.insert("seed".into(), seed.to_string());
    }
    Ok(RunConfig::from_map(map)?)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Ingest => commands::ingest(&cfg),
        Command::Detect => commands::detect(&cfg),
        Command::Evaluate => commands::evaluate(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Synth => commands::synth(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
