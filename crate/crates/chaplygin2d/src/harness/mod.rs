//! CLI-facing orchestration: configuration, single runs, sweeps, convergence
//! studies, and the null-condition report.

mod config;
mod converge;
mod run;
mod sweep;

pub use config::{EosSection, GridSection, ProfileSection, RunConfig, RunSection};
pub use converge::{cmd_converge, ConvergenceRow, ConvergenceTable};
pub use run::{cmd_run, ExitStatus, RunArtifacts, RunOptions, RunReport, SERIES_COLUMNS};
pub use sweep::{cmd_sweep, SweepComparison, SweepOptions, SweepRow};

use crate::error::Result;
use crate::nullcheck::{nullcheck_report, NullcheckReport};

/// Null-condition residual report for the configured gas model.
pub fn cmd_nullcheck(config: &RunConfig) -> Result<NullcheckReport> {
    nullcheck_report(&config.model()?)
}
