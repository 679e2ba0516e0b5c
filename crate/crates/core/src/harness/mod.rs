//! Studies, configuration and output plumbing: truncation convergence,
//! closed-form validation, admissibility audits and simulation runs.

mod config;
mod oracle;
mod output;
mod simulate;
mod truncation;
mod validation;

use std::path::Path;

pub use config::{GridConfig, OutputConfig, RunConfig, StudyConfig, BUNDLED_CONFIG, MONITOR_NAMES};
pub use oracle::Oracle;
pub use output::{
    write_convergence, write_moments, write_report, write_simulation, write_snapshots,
    write_validation, RunReport, Verdict, CONVERGENCE_FILE, MOMENTS_FILE, OPERATORS_FILE,
    REPORT_FILE, SNAPSHOTS_FILE, VALIDATION_FILE,
};
pub use simulate::{
    mass_drift, run_simulation, MonitorSummary, SimulationOutcome, SimulationSummary,
    SnapshotMonitor,
};
pub use truncation::{
    run_truncation_study, ConvergenceRow, ConvergenceTable, ReferenceKind,
    DISCRETIZATION_FLOOR_FACTOR, ROUNDOFF_FLOOR,
};
pub use validation::{
    run_validation, ValidationRow, ValidationTable, VALIDATION_L1_TARGET, VALIDATION_MIN_ORDER,
};

use crate::admissibility::{self, AdmissibilityReport};
use crate::error::Result;

/// Runs every admissibility check for the configured problem and, when `out`
/// is given, writes `report.json`.
pub fn run_admissibility(config: &RunConfig, out: Option<&Path>) -> Result<AdmissibilityReport> {
    let report =
        admissibility::audit(&config.problem, &config.probe, config.hypotheses.as_deref())?;
    if let Some(dir) = out {
        write_report(dir, &RunReport::from_admissibility(&report)?)?;
    }
    Ok(report)
}
