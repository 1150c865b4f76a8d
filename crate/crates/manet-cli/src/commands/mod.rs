//! Command implementations. Each command is a plain function over a
//! validated [`ExperimentPlan`] so the integration tests can drive them
//! without spawning the binary.

mod analyze;
mod oracle_run;
mod simulate;
mod sweep;

use std::fmt;
use std::io;

use manet_core::mobility::MobilityError;
use manet_core::oracle::OracleError;
use manet_core::simcore::SimError;

use crate::config::{Command, ExperimentPlan};

pub use analyze::emit_curves;
pub use oracle_run::run_oracle;
pub use simulate::run_simulate;
pub use sweep::run_sweep;

#[derive(Debug)]
pub enum RunError {
    Io(io::Error),
    Sim(SimError),
    Oracle(OracleError),
    Mobility(MobilityError),
    /// Some sweep runs failed; the sweep itself completed.
    Partial { failed: usize, total: usize },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Io(e) => write!(f, "io: {e}"),
            RunError::Sim(e) => write!(f, "simulation: {e}"),
            RunError::Oracle(e) => write!(f, "oracle: {e}"),
            RunError::Mobility(e) => write!(f, "mobility: {e}"),
            RunError::Partial { failed, total } => {
                write!(f, "{failed} of {total} sweep runs failed (see runs/failures.csv)")
            }
        }
    }
}

impl std::error::Error for RunError {}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<SimError> for RunError {
    fn from(e: SimError) -> Self {
        RunError::Sim(e)
    }
}

impl From<OracleError> for RunError {
    fn from(e: OracleError) -> Self {
        RunError::Oracle(e)
    }
}

impl From<MobilityError> for RunError {
    fn from(e: MobilityError) -> Self {
        RunError::Mobility(e)
    }
}

pub fn execute(plan: &ExperimentPlan) -> Result<(), RunError> {
    match plan.command {
        Command::Analyze => emit_curves(plan),
        Command::Simulate => run_simulate(plan),
        Command::Sweep => run_sweep(plan),
        Command::Oracle => run_oracle(plan),
    }
}
