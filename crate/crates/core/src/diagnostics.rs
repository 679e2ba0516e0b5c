//! Moments, weighted norms and inequality monitors on density fields and traces.
//!
//! All norms take absolute values, so they apply unchanged to signed fields
//! such as differences of solutions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{DensityField, DiscreteOperators, MassGrid};
use crate::error::{Error, Result};
use crate::kernels::FragmentationRate;
use crate::solver::SimulationTrace;

/// `Σ x_j^m f_j Δ_j`.
pub fn moment_of(grid: &MassGrid, values: &[f64], m: f64) -> f64 {
    let x = grid.centers();
    let dx = grid.widths();
    if m == 0.0 {
        return values.iter().zip(dx).map(|(f, d)| f * d).sum();
    }
    values
        .iter()
        .zip(x.iter().zip(dx))
        .map(|(f, (x, d))| x.powf(m) * f * d)
        .sum()
}

pub fn moment(f: &DensityField, m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(Error::precondition(format!(
            "moment order must be >= 0, got {m}"
        )));
    }
    Ok(moment_of(f.grid(), f.values(), m))
}

/// `‖f‖_{[0,m]} = Σ (1 + x^m) |f| Δ`.
pub fn weighted_norm(f: &DensityField, m: f64) -> f64 {
    let x = f.grid().centers();
    let dx = f.grid().widths();
    f.values()
        .iter()
        .zip(x.iter().zip(dx))
        .map(|(v, (x, d))| (1.0 + x.powf(m)) * v.abs() * d)
        .sum()
}

/// `‖f‖^{(α)}_{[0,m]} = Σ (ω + a)^α (1 + x^m) |f| Δ`.
pub fn alpha_norm(
    f: &DensityField,
    m: f64,
    alpha: f64,
    omega: f64,
    a: &FragmentationRate,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::precondition(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let rates = f
        .grid()
        .centers()
        .iter()
        .map(|&x| a.eval(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormContext::new(f.grid().clone(), rates, omega).alpha_norm(f.values(), m, alpha))
}

/// Grid, rates at the pivots and shift `ω`: everything the norms need.
#[derive(Clone, Debug)]
pub struct NormContext {
    grid: Arc<MassGrid>,
    rates: Vec<f64>,
    omega: f64,
}

impl NormContext {
    pub fn new(grid: Arc<MassGrid>, rates: Vec<f64>, omega: f64) -> Self {
        NormContext { grid, rates, omega }
    }

    pub fn from_operators(ops: &DiscreteOperators, omega: f64) -> Self {
        Self::new(ops.grid.clone(), ops.fragmentation.loss.clone(), omega)
    }

    pub fn grid(&self) -> &Arc<MassGrid> {
        &self.grid
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn sum(&self, f: &[f64], weight: impl Fn(usize, f64) -> f64) -> f64 {
        let x = self.grid.centers();
        let dx = self.grid.widths();
        (0..f.len())
            .map(|j| weight(j, x[j]) * f[j].abs() * dx[j])
            .sum()
    }

    /// `‖f‖_{[i]} = Σ x^i |f| Δ`.
    pub fn order(&self, f: &[f64], i: f64) -> f64 {
        if i == 0.0 {
            self.sum(f, |_, _| 1.0)
        } else {
            self.sum(f, |_, x| x.powf(i))
        }
    }

    /// `‖f‖^{(α)}_{[i]} = Σ x^i (ω + a)^α |f| Δ`.
    pub fn order_alpha(&self, f: &[f64], i: f64, alpha: f64) -> f64 {
        self.sum(f, |j, x| {
            x.powf(i) * (self.omega + self.rates[j]).powf(alpha)
        })
    }

    /// `‖f‖_{[0,m]}`.
    pub fn weighted(&self, f: &[f64], m: f64) -> f64 {
        self.sum(f, |_, x| 1.0 + x.powf(m))
    }

    /// `‖f‖^{(α)}_{[0,m]}`.
    pub fn alpha_norm(&self, f: &[f64], m: f64, alpha: f64) -> f64 {
        self.sum(f, |j, x| {
            (self.omega + self.rates[j]).powf(alpha) * (1.0 + x.powf(m))
        })
    }
}

/// Monitor settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorConfig {
    pub m: f64,
    pub alpha: f64,
    /// Uses the run's `ω` when absent.
    pub omega: Option<f64>,
    /// Moment order `i` of the moment-production and dissipation monitors.
    pub order: f64,
    /// `δ_i`; taken from the admissibility audit when absent.
    pub delta: Option<f64>,
    /// Allowed relative excess over a bound (calibrated or exact).
    pub tolerance: f64,
    /// Fraction of the trace used to fit envelopes.
    pub calibration_fraction: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            m: 2.0,
            alpha: 0.5,
            omega: None,
            order: 2.0,
            delta: None,
            tolerance: 0.05,
            calibration_fraction: 0.5,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 1.0) {
            return Err(Error::Config(format!(
                "monitor order m must exceed 1, got {}",
                self.m
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "monitor alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if let Some(w) = self.omega {
            if !(w > 1.0) {
                return Err(Error::Config(format!(
                    "monitor omega must exceed 1, got {w}"
                )));
            }
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Config("monitor tolerance must be >= 0".into()));
        }
        if !(self.calibration_fraction > 0.0 && self.calibration_fraction <= 1.0) {
            return Err(Error::Config(
                "calibration_fraction must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Residuals of one monitor: `(lhs - rhs) / scale` per sample, so a
/// nonpositive residual means the inequality holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub name: String,
    pub residuals: Vec<f64>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Fitted or computed constant of the bound, if any.
    pub constant: Option<f64>,
}

impl MonitorReport {
    pub fn new(
        name: impl Into<String>,
        residuals: Vec<f64>,
        tolerance: f64,
        constant: Option<f64>,
    ) -> Self {
        let max_violation = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let passed = residuals.iter().all(|r| !r.is_nan()) && !(max_violation > tolerance);
        MonitorReport {
            name: name.into(),
            residuals,
            max_violation,
            tolerance,
            passed,
            constant,
        }
    }
}

/// `(lhs - rhs) / scale`, zero when both sides vanish.
fn excess(lhs: f64, rhs: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        (lhs - rhs) / scale
    } else if lhs <= rhs {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Largest ratio `lhs / base` over the calibration samples; the frozen constant.
pub fn fit_constant(samples: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    samples
        .into_iter()
        .filter(|&(_, b)| b > 0.0)
        .map(|(l, b)| l / b)
        .fold(0.0, f64::max)
}

fn coag_moment_terms(
    ops: &DiscreteOperators,
    norms: &NormContext,
    f: &[f64],
    i: f64,
    alpha: f64,
) -> (f64, f64) {
    let cf = ops.apply_coagulation(f);
    let x = ops.grid.centers();
    let dx = ops.grid.widths();
    let lhs: f64 = (0..f.len()).map(|j| x[j].powf(i) * dx[j] * cf[j]).sum();
    let base = norms.order_alpha(f, i - 1.0, alpha) * norms.order(f, 1.0)
        + norms.order(f, i - 1.0) * norms.order_alpha(f, 1.0, alpha);
    (lhs, base)
}

/// `Σ x^i C f <= K_i (‖f‖^{(α)}_{[i-1]} ‖f‖_{[1]} + ‖f‖_{[i-1]} ‖f‖^{(α)}_{[1]})`
/// with `K_i` fitted on `calibration` and frozen for `test`.
pub fn monitor_coag_moment_bound(
    ops: &DiscreteOperators,
    norms: &NormContext,
    i: f64,
    alpha: f64,
    calibration: &[Vec<f64>],
    test: &[Vec<f64>],
    tolerance: f64,
) -> Result<MonitorReport> {
    if !(i >= 2.0) {
        return Err(Error::precondition(format!(
            "moment-production monitor needs i >= 2, got {i}"
        )));
    }
    if calibration.is_empty() {
        return Err(Error::precondition(
            "moment-production monitor needs calibration fields",
        ));
    }
    let k = fit_constant(
        calibration
            .iter()
            .map(|f| coag_moment_terms(ops, norms, f, i, alpha)),
    );
    let residuals = test
        .iter()
        .map(|f| {
            let (lhs, base) = coag_moment_terms(ops, norms, f, i, alpha);
            excess(lhs, k * base, k * base)
        })
        .collect();
    Ok(MonitorReport::new(
        format!("coag-moment-bound[i={i}]"),
        residuals,
        tolerance,
        Some(k),
    ))
}

/// `ω₁ = δ_i sup_{[0,1]} a + ω (1 + δ_i)`.
pub fn dissipation_rate(delta_i: f64, sup_a_unit: f64, omega: f64) -> f64 {
    delta_i * sup_a_unit + omega * (1.0 + delta_i)
}

/// `Σ x^i F f <= -δ_i ‖f‖^{(1)}_{[i]} + ω₁ ‖f‖_{[i]}`.
pub fn monitor_frag_dissipation(
    ops: &DiscreteOperators,
    norms: &NormContext,
    fields: &[Vec<f64>],
    i: f64,
    delta_i: f64,
    sup_a_unit: f64,
    tolerance: f64,
) -> Result<MonitorReport> {
    if !(delta_i > 0.0) {
        return Err(Error::precondition("dissipation monitor needs delta_i > 0"));
    }
    let omega1 = dissipation_rate(delta_i, sup_a_unit, norms.omega());
    let x = ops.grid.centers();
    let dx = ops.grid.widths();
    let residuals = fields
        .iter()
        .map(|f| {
            let ff = ops.apply_fragmentation(f);
            let lhs: f64 = (0..f.len()).map(|j| x[j].powf(i) * dx[j] * ff[j]).sum();
            let strong = delta_i * norms.order_alpha(f, i, 1.0);
            let weak = omega1 * norms.order(f, i);
            excess(lhs, weak - strong, weak + strong)
        })
        .collect();
    Ok(MonitorReport::new(
        format!("frag-dissipation[i={i}]"),
        residuals,
        tolerance,
        Some(omega1),
    ))
}

/// `c_a = max over pivots x_j <= 1 of (ω + a_j)^α x_j^{r-1}`.
pub fn holder_constant(norms: &NormContext, r: f64, alpha: f64) -> f64 {
    norms
        .grid()
        .centers()
        .iter()
        .zip(norms.rates())
        .filter(|(&x, _)| x <= 1.0)
        .map(|(&x, &a)| (norms.omega() + a).powf(alpha) * x.powf(r - 1.0))
        .fold(0.0, f64::max)
}

/// `‖f‖^{(α)}_{[r]} <= c_a ‖f‖_{[1]} + ‖f‖^{1-α}_{[i-1]} (‖f‖^{(1)}_{[i]})^α`.
pub fn monitor_holder_interpolation(
    norms: &NormContext,
    fields: &[Vec<f64>],
    i: f64,
    r: f64,
    alpha: f64,
    tolerance: f64,
) -> Result<MonitorReport> {
    if !(i >= 2.0 && r >= 1.0 && r <= i - 1.0) {
        return Err(Error::precondition(format!(
            "Hölder monitor needs i >= 2 and 1 <= r <= i-1, got i={i}, r={r}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::precondition("Hölder monitor needs alpha in (0, 1)"));
    }
    let ca = holder_constant(norms, r, alpha);
    let residuals = fields
        .iter()
        .map(|f| {
            let lhs = norms.order_alpha(f, r, alpha);
            let rhs = ca * norms.order(f, 1.0)
                + norms.order(f, i - 1.0).powf(1.0 - alpha)
                    * norms.order_alpha(f, i, 1.0).powf(alpha);
            excess(lhs, rhs, rhs)
        })
        .collect();
    Ok(MonitorReport::new(
        format!("holder[i={i},r={r}]"),
        residuals,
        tolerance,
        Some(ca),
    ))
}

/// `‖C(f, g)‖_{[0,m]} <= (1 + 2^m) K ‖f‖^{(α)}_{[0,m]} ‖g‖^{(α)}_{[0,m]}` under
/// product domination with constants `(K, α)`.
pub fn monitor_bilinear_bound(
    ops: &DiscreteOperators,
    norms: &NormContext,
    pairs: &[(Vec<f64>, Vec<f64>)],
    m: f64,
    alpha: f64,
    k: f64,
    tolerance: f64,
) -> MonitorReport {
    let c = (1.0 + 2f64.powf(m)) * k;
    let residuals = pairs
        .iter()
        .map(|(f, g)| {
            let cfg = ops.coagulation.apply_bilinear(&ops.grid, f, g);
            let lhs = norms.weighted(&cfg, m);
            let rhs = c * norms.alpha_norm(f, m, alpha) * norms.alpha_norm(g, m, alpha);
            excess(lhs, rhs, rhs)
        })
        .collect();
    MonitorReport::new("bilinear-bound", residuals, tolerance, Some(c))
}

/// `‖C f‖_{[0,m]} <= 2^{m+1} K ‖f‖^{(α)}_{[0,m]} ‖f‖_{[0,m]}` under sum domination.
pub fn monitor_one_sided_bound(
    ops: &DiscreteOperators,
    norms: &NormContext,
    fields: &[Vec<f64>],
    m: f64,
    alpha: f64,
    k: f64,
    tolerance: f64,
) -> MonitorReport {
    let c = 2f64.powf(m + 1.0) * k;
    let residuals = fields
        .iter()
        .map(|f| {
            let lhs = norms.weighted(&ops.apply_coagulation(f), m);
            let rhs = c * norms.alpha_norm(f, m, alpha) * norms.weighted(f, m);
            excess(lhs, rhs, rhs)
        })
        .collect();
    MonitorReport::new("one-sided-bound", residuals, tolerance, Some(c))
}

fn superadditive_parts(x: f64, y: f64, m: f64) -> (f64, f64) {
    let lhs = (x + y).powf(m) - x.powf(m) - y.powf(m);
    let rhs = x * y.powf(m - 1.0) + x.powf(m - 1.0) * y;
    (lhs, rhs)
}

/// `c_m`: largest ratio of `(x+y)^m - x^m - y^m` to `x y^{m-1} + x^{m-1} y`
/// over the probe points.
pub fn fit_superadditivity(m: f64, probe: &[(f64, f64)]) -> Result<f64> {
    if !(m > 1.0) {
        return Err(Error::precondition(format!(
            "superadditivity needs m > 1, got {m}"
        )));
    }
    Ok(fit_constant(
        probe.iter().map(|&(x, y)| superadditive_parts(x, y, m)),
    ))
}

/// `0 <= (x+y)^m - x^m - y^m <= c_m (x y^{m-1} + x^{m-1} y)` on `points`.
pub fn monitor_superadditivity(
    m: f64,
    cm: f64,
    points: &[(f64, f64)],
    tolerance: f64,
) -> MonitorReport {
    let residuals = points
        .iter()
        .map(|&(x, y)| {
            let (lhs, rhs) = superadditive_parts(x, y, m);
            let bound = cm * rhs;
            // The lower bound 0 <= lhs enters as a second one-sided check.
            excess(lhs, bound, bound).max(excess(0.0, lhs, bound.max(lhs.abs())))
        })
        .collect();
    MonitorReport::new(
        format!("superadditivity[m={m}]"),
        residuals,
        tolerance,
        Some(cm),
    )
}

/// `(x+y)^m <= 2^m (x^m + y^m)` and `1 + y^l <= 2 (1 + y^m)` for `m >= l`.
pub fn elementary_battery(m: f64, l: f64, points: &[(f64, f64)]) -> Result<MonitorReport> {
    if !(m >= l && l >= 0.0) {
        return Err(Error::precondition(format!(
            "battery needs m >= l >= 0, got m={m}, l={l}"
        )));
    }
    let residuals = points
        .iter()
        .map(|&(x, y)| {
            let a = (x + y).powf(m);
            let ab = 2f64.powf(m) * (x.powf(m) + y.powf(m));
            let b = 1.0 + y.powf(l);
            let bb = 2.0 * (1.0 + y.powf(m));
            excess(a, ab, ab).max(excess(b, bb, bb))
        })
        .collect();
    Ok(MonitorReport::new(
        format!("elementary[m={m},l={l}]"),
        residuals,
        0.0,
        None,
    ))
}

/// `sup_{[0,1]} a(y) (1 + y^i)` by dense sampling.
pub fn sup_weighted_rate_unit(a: &FragmentationRate, i: f64) -> Result<f64> {
    let samples = 10_000;
    let mut best = 0.0f64;
    for k in 0..=samples {
        let y = k as f64 / samples as f64;
        best = best.max(a.eval(y)? * (1.0 + y.powf(i)));
    }
    Ok(best)
}

/// Exponential envelope `e^{D₁ t}(s(0) + D₀/D₁ (1 - e^{-D₁ t}))` with `D₁`
/// given and `D₀ >= 0` fitted on the calibration window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub d0: f64,
    pub d1: f64,
    pub s0: f64,
}

impl Envelope {
    pub fn eval(&self, t: f64) -> f64 {
        let growth = (self.d1 * t).exp();
        let source = if self.d1 > 0.0 {
            self.d0 / self.d1 * (1.0 - (-self.d1 * t).exp())
        } else {
            self.d0 * t
        };
        growth * (self.s0 + source)
    }

    /// Smallest `D₀` that keeps the calibration samples under the envelope,
    /// inflated by `1 + margin`.
    pub fn fit(times: &[f64], series: &[f64], d1: f64, margin: f64) -> Self {
        let s0 = series[0];
        let mut d0 = 0.0f64;
        for (&t, &s) in times.iter().zip(series).skip(1) {
            if t <= 0.0 {
                continue;
            }
            let kernel = if d1 > 0.0 {
                (1.0 - (-d1 * t).exp()) / d1
            } else {
                t
            };
            let need = (s * (-d1 * t).exp() - s0) / kernel;
            d0 = d0.max(need);
        }
        Envelope {
            d0: d0 * (1.0 + margin),
            d1,
            s0,
        }
    }
}

/// One series of the ledger and its envelope check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub envelope: Vec<f64>,
    /// `max_t (s(t) / E(t) - 1)`; nonpositive when the series stays below.
    pub max_excess: f64,
    pub passed: bool,
}

impl LedgerSeries {
    fn new(name: &str, values: Vec<f64>, envelope: Vec<f64>) -> Self {
        let max_excess = values
            .iter()
            .zip(&envelope)
            .map(|(&s, &e)| excess(s, e, e.abs().max(f64::MIN_POSITIVE)))
            .fold(f64::NEG_INFINITY, f64::max);
        LedgerSeries {
            name: name.to_string(),
            values,
            envelope,
            passed: max_excess <= 1e-12,
            max_excess,
        }
    }
}

/// `Φ(t)`, `P(t)`, `M₀`, `M₂` with their exponential envelopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiLedger {
    pub times: Vec<f64>,
    pub order: f64,
    pub delta: f64,
    pub omega1: f64,
    pub a1: f64,
    pub phi: LedgerSeries,
    pub p: LedgerSeries,
    pub m0: LedgerSeries,
    pub m2: LedgerSeries,
}

impl PhiLedger {
    pub fn passed(&self) -> bool {
        self.phi.passed && self.p.passed && self.m0.passed && self.m2.passed
    }
}

/// Builds the ledger from a trace.
///
/// `M₀` is checked against `e^{a₁ t}(M₀(0) + 2 b₀ ∫_0^t P)` with
/// `a₁ = 2 b₀ sup_{[0,1]} a w_i`, which needs no fitting. `Φ`, `P` and `M₂`
/// use envelopes with growth rate `ω₁` and a source term fitted on the first
/// `calibration_fraction` of the trace.
pub fn phi_ledger(
    trace: &SimulationTrace,
    rate: &FragmentationRate,
    delta_i: f64,
    b0: f64,
    calibration_fraction: f64,
) -> Result<PhiLedger> {
    if trace.rows.len() < 2 {
        return Err(Error::precondition(
            "ledger needs a trace with at least two rows",
        ));
    }
    if !(delta_i >= 0.0) {
        return Err(Error::precondition("ledger needs delta_i >= 0"));
    }
    let i = trace.ledger_order;
    let times: Vec<f64> = trace.rows.iter().map(|r| r.t).collect();
    let phi: Vec<f64> = trace
        .rows
        .iter()
        .map(|r| r.ledger_moment + delta_i * r.dissipation_integral)
        .collect();
    let p: Vec<f64> = trace.rows.iter().map(|r| r.p).collect();
    let m0: Vec<f64> = trace.rows.iter().map(|r| r.m0).collect();
    let m2: Vec<f64> = trace.rows.iter().map(|r| r.m2).collect();

    let sup_a = rate.sup_on(0.0, 1.0)?;
    let omega1 = dissipation_rate(delta_i, sup_a, trace.omega);
    let a1 = 2.0 * b0 * sup_weighted_rate_unit(rate, i)?;

    let t_end = times[times.len() - 1];
    let n_cal = times
        .iter()
        .take_while(|&&t| t <= calibration_fraction * t_end)
        .count()
        .max(2);
    let fitted = |name: &str, s: &[f64]| {
        let env = Envelope::fit(&times[..n_cal], &s[..n_cal], omega1, 0.05);
        LedgerSeries::new(
            name,
            s.to_vec(),
            times.iter().map(|&t| env.eval(t)).collect(),
        )
    };
    let m0_env: Vec<f64> = trace
        .rows
        .iter()
        .map(|r| (a1 * r.t).exp() * (m0[0] + 2.0 * b0 * r.p_integral))
        .collect();

    Ok(PhiLedger {
        order: i,
        delta: delta_i,
        omega1,
        a1,
        phi: fitted("phi", &phi),
        p: fitted("p", &p),
        m0: LedgerSeries::new("m0", m0, m0_env),
        m2: fitted("m2", &m2),
        times,
    })
}
