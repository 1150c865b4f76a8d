use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manet_cli::config::{Command, Overrides};

#[derive(Parser)]
#[command(
    name = "manet",
    about = "Slot-based simulator and scaling-law toolkit for mobile ad-hoc networks with power-law restricted mobility"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (flat key = value or JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed (overrides the config's `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the closed-form power and trade-off curves as CSV.
    Analyze(Common),
    /// Run one seeded simulation.
    Simulate(Common),
    /// Run a parameter sweep across seeds and aggregate the results.
    Sweep(Common),
    /// Run the Monte Carlo estimators.
    Oracle(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Analyze(c) => (Command::Analyze, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Oracle(c) => (Command::Oracle, c),
    };
    let overrides = Overrides {
        out: common.out,
        seed: common.seed,
        workers: common.workers,
    };
    manet_cli::run(command, &common.config, overrides)
}
