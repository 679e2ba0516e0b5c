use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::simulate::SimulationOutcome;
use super::truncation::ConvergenceTable;
use super::validation::ValidationTable;
use crate::admissibility::AdmissibilityReport;
use crate::error::Result;
use crate::solver::SimulationTrace;

pub const REPORT_FILE: &str = "report.json";
pub const MOMENTS_FILE: &str = "moments.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const VALIDATION_FILE: &str = "validation.csv";
pub const OPERATORS_FILE: &str = "operators.mtx";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Common envelope of every `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    pub details: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &str, verdicts: Vec<Verdict>, details: serde_json::Value) -> Self {
        RunReport {
            command: command.into(),
            passed: verdicts.iter().all(|v| v.passed),
            verdicts,
            details,
        }
    }

    pub fn from_admissibility(report: &AdmissibilityReport) -> Result<Self> {
        let verdicts = report
            .checks
            .iter()
            .filter(|c| c.required)
            .map(|c| Verdict {
                name: c.name.clone(),
                passed: c.passed,
                detail: c.detail.clone(),
            })
            .collect();
        Ok(Self::new("check", verdicts, serde_json::to_value(report)?))
    }

    pub fn from_convergence(table: &ConvergenceTable) -> Result<Self> {
        let detail = table
            .rows
            .iter()
            .map(|r| format!("r={}: {:.3e}", r.radius, r.sup_alpha_error))
            .collect::<Vec<_>>()
            .join(", ");
        let verdicts = vec![Verdict {
            name: "truncation-convergence".into(),
            passed: table.passed,
            detail,
        }];
        Ok(Self::new(
            "converge",
            verdicts,
            serde_json::to_value(table)?,
        ))
    }

    pub fn from_validation(table: &ValidationTable) -> Result<Self> {
        let verdicts = vec![Verdict {
            name: format!("validation-{}", table.case.name()),
            passed: table.passed,
            detail: format!(
                "min order {:.3}, finest error at t=1 {}",
                table.min_order,
                table
                    .finest_error_t1
                    .map_or("n/a".into(), |e| format!("{e:.3e}"))
            ),
        }];
        Ok(Self::new(
            "validate",
            verdicts,
            serde_json::to_value(table)?,
        ))
    }

    pub fn from_simulation(outcome: &SimulationOutcome) -> Result<Self> {
        let s = &outcome.summary;
        let mut verdicts = vec![Verdict {
            name: "termination".into(),
            passed: s.termination == crate::solver::Termination::ReachedFinal,
            detail: format!("{:?} at t = {}", s.termination, s.final_time),
        }];
        verdicts.extend(s.monitors.iter().map(|m| Verdict {
            name: m.name.clone(),
            passed: m.passed,
            detail: format!(
                "max violation {:.3e} (tolerance {})",
                m.max_violation, m.tolerance
            ),
        }));
        Ok(Self::new("simulate", verdicts, serde_json::to_value(s)?))
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {}\n",
            self.command,
            if self.passed { "PASS" } else { "FAIL" }
        );
        for v in &self.verdicts {
            s.push_str(&format!(
                "  [{}] {:<28} {}\n",
                if v.passed { "pass" } else { "FAIL" },
                v.name,
                v.detail
            ));
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn create(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

pub fn write_report(dir: &Path, report: &RunReport) -> Result<PathBuf> {
    let path = create(dir, REPORT_FILE)?;
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    Ok(path)
}

/// One row per accepted step. Snapshot monitors fill their column on rows
/// that carry a snapshot; ledger columns hold `s(t)/E(t) - 1` on every row.
pub fn write_moments<W: Write>(
    w: W,
    trace: &SimulationTrace,
    outcome: Option<&SimulationOutcome>,
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header: Vec<String> = [
        "t",
        "dt",
        "m0",
        "m1",
        "m2",
        "mm",
        "norm",
        "alpha_norm",
        "ledger_moment",
        "dissipation",
        "dissipation_integral",
        "p",
        "p_integral",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let monitors = outcome.map_or(&[][..], |o| &o.monitors[..]);
    header.extend(monitors.iter().map(|m| m.report.name.clone()));
    let ledger = outcome.and_then(|o| o.ledger.as_ref());
    if ledger.is_some() {
        header.extend(["ledger_phi", "ledger_p", "ledger_m0", "ledger_m2"].map(String::from));
    }
    csv.write_record(&header)?;
    for (k, r) in trace.rows.iter().enumerate() {
        let mut rec = vec![
            num(r.t),
            num(r.dt),
            num(r.m0),
            num(r.m1),
            num(r.m2),
            num(r.mm),
            num(r.norm),
            num(r.alpha_norm),
            num(r.ledger_moment),
            num(r.dissipation),
            num(r.dissipation_integral),
            num(r.p),
            num(r.p_integral),
        ];
        for m in monitors {
            rec.push(
                m.times
                    .iter()
                    .position(|&t| t == r.t)
                    .map_or(String::new(), |j| num(m.report.residuals[j])),
            );
        }
        if let Some(l) = ledger {
            for s in [&l.phi, &l.p, &l.m0, &l.m2] {
                rec.push(num(s.values[k] / s.envelope[k] - 1.0));
            }
        }
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

/// Long format: one row per snapshot and cell.
pub fn write_snapshots<W: Write>(w: W, trace: &SimulationTrace) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["t", "cell", "x", "dx", "f"])?;
    let x = trace.grid.centers();
    let dx = trace.grid.widths();
    for s in &trace.snapshots {
        for (j, v) in s.values.iter().enumerate() {
            csv.write_record([num(s.t), j.to_string(), num(x[j]), num(dx[j]), num(*v)])?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn write_convergence<W: Write>(w: W, table: &ConvergenceTable) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "radius",
        "cells",
        "sup_alpha_error",
        "sup_l1_error",
        "ratio",
        "saturated",
    ])?;
    for r in &table.rows {
        csv.write_record([
            num(r.radius),
            r.cells.to_string(),
            num(r.sup_alpha_error),
            num(r.sup_l1_error),
            r.ratio.map_or(String::new(), num),
            r.saturated.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_validation<W: Write>(w: W, table: &ValidationTable) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "case", "cells", "t", "l1_error", "m0", "m0_exact", "m1", "order",
    ])?;
    for r in &table.rows {
        csv.write_record([
            table.case.name().to_string(),
            r.cells.to_string(),
            num(r.t),
            num(r.l1_error),
            num(r.m0),
            num(r.m0_exact),
            num(r.m1),
            r.order.map_or(String::new(), num),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes `moments.csv`, `snapshots.csv`, `report.json` and, on request,
/// the operator dump.
pub fn write_simulation(
    dir: &Path,
    outcome: &SimulationOutcome,
    dump_operators: bool,
) -> Result<RunReport> {
    write_moments(
        File::create(create(dir, MOMENTS_FILE)?)?,
        &outcome.trace,
        Some(outcome),
    )?;
    write_snapshots(
        BufWriter::new(File::create(create(dir, SNAPSHOTS_FILE)?)?),
        &outcome.trace,
    )?;
    if dump_operators {
        outcome
            .operators
            .dump_matrix_market(BufWriter::new(File::create(create(dir, OPERATORS_FILE)?)?))?;
    }
    let report = RunReport::from_simulation(outcome)?;
    write_report(dir, &report)?;
    Ok(report)
}
