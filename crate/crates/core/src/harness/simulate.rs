use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::admissibility::{self, AdmissibilityReport, DominationMode};
use crate::diagnostics::{self, MonitorReport, NormContext, PhiLedger};
use crate::discretization::DiscreteOperators;
use crate::error::{Error, Result};
use crate::solver::{self, SimulationTrace, Termination};

/// Per-snapshot residuals of one monitor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMonitor {
    pub report: MonitorReport,
    /// Snapshot times the residuals belong to.
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub constant: Option<f64>,
}

impl From<&MonitorReport> for MonitorSummary {
    fn from(r: &MonitorReport) -> Self {
        MonitorSummary {
            name: r.name.clone(),
            max_violation: r.max_violation,
            tolerance: r.tolerance,
            passed: r.passed,
            constant: r.constant,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub termination: Termination,
    pub final_time: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub clip_events: usize,
    pub omega: f64,
    /// `max_t |M₁(t) - M₁(0)| / M₁(0)`
    pub mass_drift: f64,
    pub monitors: Vec<MonitorSummary>,
    /// Monitors that could not run, with the reason.
    pub skipped: Vec<String>,
    pub passed: bool,
}

pub struct SimulationOutcome {
    pub trace: SimulationTrace,
    pub operators: DiscreteOperators,
    pub admissibility: Option<AdmissibilityReport>,
    pub monitors: Vec<SnapshotMonitor>,
    pub ledger: Option<PhiLedger>,
    pub summary: SimulationSummary,
}

pub fn mass_drift(trace: &SimulationTrace) -> f64 {
    let m10 = trace.rows[0].m1;
    trace
        .rows
        .iter()
        .map(|r| (r.m1 - m10).abs())
        .fold(0.0, f64::max)
        / m10.abs().max(f64::MIN_POSITIVE)
}

/// Integrates the configured problem and evaluates the requested monitors on
/// its snapshots. Refuses inadmissible problems unless `unchecked`.
pub fn run_simulation(config: &RunConfig, unchecked: bool) -> Result<SimulationOutcome> {
    config.validate()?;
    let spec = &config.problem;
    let audit = match admissibility::audit(spec, &config.probe, config.hypotheses.as_deref()) {
        Ok(r) => Some(r),
        Err(e) if unchecked => {
            log::warn!("admissibility audit unavailable: {e}");
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(r) = &audit {
        if !r.passed() && !unchecked {
            return Err(Error::Hypothesis(format!(
                "problem is not admissible:\n{}",
                r.table()
            )));
        }
    }

    let grid = Arc::new(config.grid.build()?);
    let ops = DiscreteOperators::assemble(spec, grid.clone())?;
    let f0 = solver::initial_field(spec, grid)?;
    let omega = spec.omega.unwrap_or_else(|| solver::estimate_omega(&ops));
    let trace = solver::integrate_operators(&ops, f0.values(), spec.m, omega, &config.controls)?;

    let settings = &config.monitor_settings;
    let norms = NormContext::new(
        ops.grid.clone(),
        ops.fragmentation.loss.clone(),
        settings.omega.unwrap_or(omega),
    );
    let fields: Vec<Vec<f64>> = trace.snapshots.iter().map(|s| s.values.clone()).collect();
    let times: Vec<f64> = trace.snapshots.iter().map(|s| s.t).collect();
    let i = settings.order;
    let delta = settings
        .delta
        .or_else(|| audit.as_ref().and_then(|r| r.delta_at(i)))
        .or_else(|| {
            admissibility::check_goodchar(
                &spec.daughter,
                i,
                &config.probe.probe_masses(),
                config.probe.liminf_floor,
            )
            .ok()
            .filter(|g| g.passed)
            .map(|g| g.delta)
        });
    let domination = |mode: DominationMode| {
        audit.as_ref().and_then(|r| {
            r.domination
                .iter()
                .find(|d| d.mode == mode && d.passed)
                .cloned()
        })
    };

    let mut monitors = Vec::new();
    let mut skipped = Vec::new();
    let mut ledger = None;
    for name in &config.monitors {
        let report = match name.as_str() {
            "dissipation" => match delta {
                Some(d) if d > 0.0 => Some(diagnostics::monitor_frag_dissipation(
                    &ops,
                    &norms,
                    &fields,
                    i,
                    d,
                    spec.fragmentation.sup_on(0.0, 1.0)?,
                    settings.tolerance,
                )?),
                _ => {
                    skipped.push(format!("dissipation: no positive delta at order {i}"));
                    None
                }
            },
            "holder" => {
                if i >= 2.0 {
                    Some(diagnostics::monitor_holder_interpolation(
                        &norms,
                        &fields,
                        i,
                        1.0,
                        settings.alpha,
                        settings.tolerance,
                    )?)
                } else {
                    skipped.push(format!("holder: needs order >= 2, got {i}"));
                    None
                }
            }
            "coag-moment" => {
                if i >= 2.0 && !ops.coagulation.is_zero() {
                    let n_cal = ((fields.len() as f64 * settings.calibration_fraction).ceil()
                        as usize)
                        .max(1);
                    Some(diagnostics::monitor_coag_moment_bound(
                        &ops,
                        &norms,
                        i,
                        settings.alpha,
                        &fields[..n_cal],
                        &fields,
                        settings.tolerance,
                    )?)
                } else {
                    skipped.push("coag-moment: needs order >= 2 and a nonzero kernel".into());
                    None
                }
            }
            "bilinear" => match domination(DominationMode::PointwiseProduct) {
                Some(d) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    let pairs: Vec<(Vec<f64>, Vec<f64>)> = fields
                        .iter()
                        .map(|f| {
                            let g = f.iter().map(|v| v * rng.random::<f64>()).collect();
                            (f.clone(), g)
                        })
                        .collect();
                    Some(diagnostics::monitor_bilinear_bound(
                        &ops,
                        &norms,
                        &pairs,
                        settings.m,
                        d.alpha,
                        d.k,
                        settings.tolerance,
                    ))
                }
                None => {
                    skipped.push("bilinear: product domination not established".into());
                    None
                }
            },
            "one-sided" => match domination(DominationMode::PointwiseSum) {
                Some(d) => Some(diagnostics::monitor_one_sided_bound(
                    &ops,
                    &norms,
                    &fields,
                    settings.m,
                    d.alpha,
                    d.k,
                    settings.tolerance,
                )),
                None => {
                    skipped.push("one-sided: sum domination not established".into());
                    None
                }
            },
            "ledger" => {
                let b0 = audit.as_ref().map(|r| r.b0).filter(|b| b.is_finite());
                match (delta, b0) {
                    (Some(d), Some(b0)) if trace.rows.len() >= 2 => {
                        ledger = Some(diagnostics::phi_ledger(
                            &trace,
                            &spec.fragmentation,
                            d,
                            b0,
                            settings.calibration_fraction,
                        )?);
                    }
                    _ => skipped.push("ledger: needs delta, b0 and two recorded rows".into()),
                }
                None
            }
            other => return Err(Error::Config(format!("unknown monitor `{other}`"))),
        };
        if let Some(report) = report {
            monitors.push(SnapshotMonitor {
                report,
                times: times.clone(),
            });
        }
    }

    let mut summaries: Vec<MonitorSummary> = monitors
        .iter()
        .map(|m| MonitorSummary::from(&m.report))
        .collect();
    if let Some(l) = &ledger {
        for s in [&l.phi, &l.p, &l.m0, &l.m2] {
            summaries.push(MonitorSummary {
                name: format!("ledger-{}", s.name),
                max_violation: s.max_excess,
                tolerance: 0.0,
                passed: s.passed,
                constant: None,
            });
        }
    }
    let passed =
        trace.termination == Termination::ReachedFinal && summaries.iter().all(|s| s.passed);
    let summary = SimulationSummary {
        termination: trace.termination,
        final_time: trace.final_time(),
        accepted_steps: trace.accepted_steps(),
        rejected_steps: trace.steps.len() - trace.accepted_steps(),
        clip_events: trace.clips.len(),
        omega,
        mass_drift: mass_drift(&trace),
        monitors: summaries,
        skipped,
        passed,
    };
    Ok(SimulationOutcome {
        trace,
        operators: ops,
        admissibility: audit,
        monitors,
        ledger,
        summary,
    })
}
