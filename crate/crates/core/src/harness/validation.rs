use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::StudyConfig;
use super::oracle::Oracle;
use crate::discretization::{DensityField, DiscreteOperators, MassGrid, Spacing};
use crate::error::{Error, Result};
use crate::solver::{self, IntegratorControls, SimulationTrace};

/// Relative L¹ error allowed at `t = 1` on the finest grid.
pub const VALIDATION_L1_TARGET: f64 = 1e-2;

/// Smallest acceptable observed order under grid refinement.
pub const VALIDATION_MIN_ORDER: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub cells: usize,
    pub t: f64,
    /// `Σ |f_j - P f(t)_j| Δ_j / Σ |P f(t)_j| Δ_j` against the projected closed form.
    pub l1_error: f64,
    pub m0: f64,
    pub m0_exact: f64,
    pub m1: f64,
    /// Observed order against the next coarser grid at the same time.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationTable {
    pub case: Oracle,
    pub radius: f64,
    pub rows: Vec<ValidationRow>,
    pub min_order: f64,
    /// Error at `t = 1` on the finest grid, when `1` is among the times.
    pub finest_error_t1: Option<f64>,
    pub passed: bool,
}

impl ValidationTable {
    pub fn row(&self, cells: usize, t: f64) -> Option<&ValidationRow> {
        self.rows
            .iter()
            .find(|r| r.cells == cells && (r.t - t).abs() < 1e-9)
    }
}

fn states_at(trace: &SimulationTrace, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    times
        .iter()
        .map(|&t| {
            trace
                .snapshots
                .iter()
                .find(|s| (s.t - t).abs() <= 1e-9 * t.max(1.0))
                .map(|s| s.values.clone())
                .ok_or_else(|| Error::Study(format!("no snapshot at t = {t}")))
        })
        .collect()
}

/// Solutions at `times`. Pure fragmentation is linear, so exponential Euler
/// is exact in time; pure coagulation uses `2 u(h/2) - u(h)`.
fn solve(
    case: Oracle,
    grid: Arc<MassGrid>,
    times: &[f64],
    study: &StudyConfig,
) -> Result<Vec<Vec<f64>>> {
    let spec = case.spec();
    let ops = DiscreteOperators::assemble(&spec, grid.clone())?;
    let f0 = solver::initial_field(&spec, grid)?;
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let omega = solver::estimate_omega(&ops);
    let run = |dt: f64| -> Result<Vec<Vec<f64>>> {
        let controls = IntegratorControls {
            snapshot_stride: 1,
            ..IntegratorControls::fixed(t_end, dt)
        };
        let trace = solver::integrate_operators(&ops, f0.values(), spec.m, omega, &controls)?;
        states_at(&trace, times)
    };
    match case {
        Oracle::PureFragmentation => {
            // any step hitting the requested times is exact
            let dt = times.iter().fold(t_end, |g, &t| gcd_step(g, t));
            run(dt)
        }
        Oracle::PureCoagulation => {
            let h = study.validation_dt;
            let coarse = run(h)?;
            let fine = run(0.5 * h)?;
            Ok(coarse
                .into_iter()
                .zip(fine)
                .map(|(c, f)| c.iter().zip(&f).map(|(c, f)| 2.0 * f - c).collect())
                .collect())
        }
    }
}

/// Largest step of the form `t / k` dividing both `a` and `b` (to 1e-9).
fn gcd_step(a: f64, b: f64) -> f64 {
    for k in 1..=10_000u32 {
        let h = a / k as f64;
        let q = b / h;
        if (q - q.round()).abs() < 1e-9 {
            return h;
        }
    }
    a / 10_000.0
}

/// L¹ errors against the closed form at `study.validation_times` on each
/// grid of `study.validation_cells`, with observed orders between
/// consecutive grids.
pub fn run_validation(case: Oracle, study: &StudyConfig) -> Result<ValidationTable> {
    study.validate()?;
    let radius = study.validation_radius;
    let times = &study.validation_times;
    let results: Vec<Result<(usize, Arc<MassGrid>, Vec<Vec<f64>>)>> = study
        .validation_cells
        .par_iter()
        .map(|&n| {
            let grid = Arc::new(MassGrid::build(radius, n, Spacing::default())?);
            let states = solve(case, grid.clone(), times, study)?;
            Ok((n, grid, states))
        })
        .collect();

    let mut rows = Vec::new();
    let mut previous: Option<(usize, Vec<f64>)> = None;
    for result in results {
        let (n, grid, states) = result?;
        let mut errors = Vec::with_capacity(times.len());
        for (&t, f) in times.iter().zip(&states) {
            let exact = DensityField::project(grid.clone(), |x| case.density(t, x))?;
            let dx = grid.widths();
            let num: f64 = f
                .iter()
                .zip(exact.values())
                .zip(dx)
                .map(|((a, b), d)| (a - b).abs() * d)
                .sum();
            let den: f64 = exact
                .values()
                .iter()
                .zip(dx)
                .map(|(b, d)| b.abs() * d)
                .sum();
            let err = num / den;
            let field = DensityField::new(grid.clone(), f.clone())?;
            errors.push(err);
            rows.push(ValidationRow {
                cells: n,
                t,
                l1_error: err,
                m0: field.moment(0.0),
                m0_exact: case.number(t),
                m1: field.moment(1.0),
                order: None,
            });
        }
        if let Some((coarse_n, prev)) = previous {
            let base = rows.len() - times.len();
            let refine = (n as f64 / coarse_n as f64).ln();
            for (k, (p, e)) in prev.iter().zip(&errors).enumerate() {
                rows[base + k].order = Some((p / e).ln() / refine);
            }
        }
        previous = Some((n, errors));
    }
    let min_order = rows
        .iter()
        .filter_map(|r| r.order)
        .fold(f64::INFINITY, f64::min);
    let finest = *study.validation_cells.last().expect("validated");
    let finest_error_t1 = rows
        .iter()
        .find(|r| r.cells == finest && (r.t - 1.0).abs() < 1e-9)
        .map(|r| r.l1_error);
    let passed = min_order >= VALIDATION_MIN_ORDER
        && finest_error_t1.is_none_or(|e| e <= VALIDATION_L1_TARGET);
    Ok(ValidationTable {
        case,
        radius,
        rows,
        min_order,
        finest_error_t1,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> StudyConfig {
        StudyConfig {
            validation_cells: vec![48, 96],
            validation_radius: 32.0,
            validation_times: vec![0.5, 1.0],
            validation_dt: 0.01,
            ..StudyConfig::default()
        }
    }

    #[test]
    fn step_divides_all_times() {
        let h = gcd_step(2.0, 0.5);
        assert!((h - 0.5).abs() < 1e-15);
        let h = [0.5, 1.0, 2.0].iter().fold(2.0, |g, &t| gcd_step(g, t));
        assert!((h - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fragmentation_errors_shrink() {
        let t = run_validation(Oracle::PureFragmentation, &quick()).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(t.min_order > 1.5, "{t:#?}");
        for r in &t.rows {
            assert!((r.m1 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn coagulation_errors_shrink() {
        let t = run_validation(Oracle::PureCoagulation, &quick()).unwrap();
        assert!(t.min_order > 1.0, "{t:#?}");
        let r = t.row(96, 1.0).unwrap();
        assert!((r.m0 - 2.0 / 3.0).abs() < 1e-2);
    }
}
