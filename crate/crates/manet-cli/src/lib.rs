//! Experiment front-end for the restricted-mobility MANET simulator.
//!
//! Four commands over a flat key = value (or JSON) configuration:
//!
//! * `analyze`  — emit the closed-form power and trade-off curves as CSV.
//! * `simulate` — run one seeded simulation, write the report as JSON and
//!   the per-flow metrics as CSV.
//! * `sweep`    — run a parameter sweep across seeds, one result file per
//!   run plus an aggregate with means, confidence intervals and log-log
//!   slope fits.
//! * `oracle`   — run the Monte Carlo estimators and emit estimate rows.
//!
//! Outputs are deterministic given the plan: rerunning a plan yields
//! byte-identical files (same platform floating point assumed).

pub mod commands;
pub mod config;
pub mod output;

pub use config::{Command, ConfigError, ExperimentPlan};

use std::path::Path;
use std::process::ExitCode;

/// Exit codes: 0 success, 1 configuration error, 2 run failure.
pub fn run(command: Command, config_path: &Path, plan_overrides: config::Overrides) -> ExitCode {
    let raw = match std::fs::read_to_string(config_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(1);
        }
    };
    let plan = match ExperimentPlan::parse(command, &raw, plan_overrides) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    match commands::execute(&plan) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("run error: {e}");
            ExitCode::from(2)
        }
    }
}
