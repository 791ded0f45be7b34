mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use config::RunConfig;

/// Minimum-SIR statistics, underlay power policy and multicast rate.
#[derive(Parser)]
#[command(name = "minsir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact, asymptotic and simulated CDF of the minimum SIR over a z grid.
    MinCdf(Common),
    /// Secondary power policy over a sweep of P_p, p0 or M.
    Power(Common),
    /// Per-user ergodic multicast rate over a sweep.
    Rate(Common),
    /// Simulated outages and rate under the power policy.
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides `output` in the config. Stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// No progress messages on stderr.
    #[arg(long)]
    quiet: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match &cli.command {
        Command::MinCdf(c) => ("min-cdf", c),
        Command::Power(c) => ("power", c),
        Command::Rate(c) => ("rate", c),
        Command::Simulate(c) => ("simulate", c),
    };
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.monte_carlo.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.monte_carlo.trials = trials;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    let table = match cli.command {
        Command::MinCdf(_) => commands::min_cdf(&cfg)?,
        Command::Power(_) => commands::power(&cfg)?,
        Command::Rate(_) => commands::rate(&cfg)?,
        Command::Simulate(_) => commands::simulate(&cfg)?,
    };
    let text = table.render();
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            if !common.quiet {
                eprintln!("{name}: wrote {} rows to {}", table.len(), path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(e)) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(3)
        }
    }
}
