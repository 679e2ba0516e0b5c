//! Exponential-Euler integration of the truncated problem
//! `f' = (-A + B) f + C f` in its Duhamel form.
//!
//! One step is `f_{n+1} = e^{hG} f_n + h φ₁(hG) C f_n` with `G` the
//! fragmentation generator. Step sizes live on the dyadic ladder
//! `dt_max / 2^k`, so the exponentials of every size in use are computed once
//! and cached. Local errors come from step doubling.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::NormContext;
use crate::discretization::{DensityField, DiscreteOperators, MassGrid};
use crate::error::{Error, Result};
use crate::kernels::ProblemSpec;
use crate::linalg::{self, ExpPhi, KrylovOptions};

/// Threshold on `‖f‖_∞`-relative negatives that the clip-tiny policy absorbs.
pub const CLIP_THRESHOLD: f64 = 1e-13;

/// Grids above this size use the Krylov action under `ExpBackend::Auto`.
pub const KRYLOV_THRESHOLD: usize = 1024;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativityPolicy {
    Reject,
    #[default]
    ClipTiny,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpBackend {
    #[default]
    Auto,
    Dense,
    Krylov,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorControls {
    pub t_final: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub negativity: NegativityPolicy,
    /// Run stops once `‖f‖^{(α)}_{[0,m]}` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
    /// Exponent of the interpolation norm used for the blow-up proxy.
    pub alpha: f64,
    /// Order `i` of `Φ(t)` and `P(t)` bookkeeping.
    pub ledger_order: f64,
    /// Keep a density snapshot every this many accepted steps (and the last one).
    pub snapshot_stride: usize,
    pub backend: ExpBackend,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        IntegratorControls {
            t_final: 1.0,
            dt_init: 1e-3,
            dt_min: 1e-7,
            dt_max: 0.05,
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            negativity: NegativityPolicy::ClipTiny,
            blowup_factor: 1e12,
            alpha: 0.5,
            ledger_order: 2.0,
            snapshot_stride: 10,
            backend: ExpBackend::Auto,
        }
    }
}

impl IntegratorControls {
    /// Fixed step `dt` without error control.
    pub fn fixed(t_final: f64, dt: f64) -> Self {
        IntegratorControls {
            t_final,
            dt_init: dt,
            dt_min: dt,
            dt_max: dt,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::Config(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::Config("blowup_factor must exceed 1".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }

    fn is_fixed(&self) -> bool {
        self.dt_min == self.dt_max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedFinal,
    BlowupCap,
    StepUnderflow,
}

/// Scalar series recorded after every accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub t: f64,
    pub dt: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    /// Moment of the configured weight order `m`.
    pub mm: f64,
    /// `‖f‖_{[0,m]}`
    pub norm: f64,
    /// `‖f‖^{(α)}_{[0,m]}`
    pub alpha_norm: f64,
    /// `‖f‖_{[i]}` for the ledger order `i`.
    pub ledger_moment: f64,
    /// `Σ_{x >= 1} a x^i f Δ`
    pub dissipation: f64,
    /// Trapezoidal `∫_0^t` of `dissipation`.
    pub dissipation_integral: f64,
    /// `P(t) = Σ_{x >= 1} a w_i f Δ`
    pub p: f64,
    pub p_integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub error: f64,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipEvent {
    pub t: f64,
    pub count: usize,
    pub most_negative: f64,
}

#[derive(Clone, Debug)]
pub struct SimulationTrace {
    pub grid: Arc<MassGrid>,
    pub m: f64,
    pub alpha: f64,
    pub omega: f64,
    pub ledger_order: f64,
    pub rows: Vec<MomentRow>,
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepRecord>,
    pub clips: Vec<ClipEvent>,
    pub termination: Termination,
    pub final_state: Vec<f64>,
}

impl SimulationTrace {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    pub fn final_field(&self) -> DensityField {
        DensityField::new(self.grid.clone(), self.final_state.clone()).expect("sized by grid")
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.accepted).count()
    }
}

enum StepMatrices {
    Dense(ExpPhi),
    Krylov,
}

/// Exponential-Euler stepper with per-step-size caching of `e^{hG}`, `φ₁(hG)`.
pub struct ExponentialStepper<'a> {
    ops: &'a DiscreteOperators,
    krylov: bool,
    cache: HashMap<u64, Arc<StepMatrices>>,
}

impl<'a> ExponentialStepper<'a> {
    pub fn new(ops: &'a DiscreteOperators, backend: ExpBackend) -> Self {
        let krylov = match backend {
            ExpBackend::Auto => ops.len() > KRYLOV_THRESHOLD,
            ExpBackend::Dense => false,
            ExpBackend::Krylov => true,
        };
        ExponentialStepper {
            ops,
            krylov,
            cache: HashMap::new(),
        }
    }

    fn matrices(&mut self, dt: f64) -> Result<Arc<StepMatrices>> {
        if let Some(m) = self.cache.get(&dt.to_bits()) {
            return Ok(m.clone());
        }
        let m = if self.krylov {
            StepMatrices::Krylov
        } else {
            StepMatrices::Dense(linalg::expm_phi1(&self.ops.generator, dt)?)
        };
        if self.cache.len() >= 24 {
            self.cache.clear();
        }
        let m = Arc::new(m);
        self.cache.insert(dt.to_bits(), m.clone());
        Ok(m)
    }

    /// `e^{dt G} f + dt φ₁(dt G) C f`.
    pub fn step(&mut self, f: &[f64], dt: f64) -> Result<Vec<f64>> {
        let cf = if self.ops.coagulation.is_zero() {
            None
        } else {
            Some(self.ops.apply_coagulation(f))
        };
        match &*self.matrices(dt)? {
            StepMatrices::Dense(ep) => {
                let mut out = linalg::matvec(&ep.exp, f);
                if let Some(cf) = cf {
                    let p = linalg::matvec(&ep.phi1, &cf);
                    out.iter_mut().zip(p).for_each(|(o, v)| *o += dt * v);
                }
                Ok(out)
            }
            StepMatrices::Krylov => {
                let g = &self.ops.generator;
                match cf {
                    Some(cf) => linalg::krylov_exp_phi_action(
                        |x| linalg::matvec(g, x),
                        f,
                        &cf,
                        dt,
                        KrylovOptions::default(),
                    ),
                    None => linalg::krylov_expmv(
                        |x| linalg::matvec(g, x),
                        f,
                        dt,
                        KrylovOptions::default(),
                    ),
                }
            }
        }
    }
}

/// One exponential-Euler step without caching.
pub fn step_exponential(
    ops: &DiscreteOperators,
    f: &DensityField,
    dt: f64,
) -> Result<DensityField> {
    if !(dt > 0.0) {
        return Err(Error::precondition(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let out = ExponentialStepper::new(ops, ExpBackend::Auto).step(f.values(), dt)?;
    DensityField::new(f.grid().clone(), out)
}

/// Clips negatives no larger than `CLIP_THRESHOLD · ‖f‖_∞`; returns
/// `(clipped, most_negative)` or `None` when a larger negative remains.
fn clip_tiny(f: &mut [f64]) -> Option<(usize, f64)> {
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = -CLIP_THRESHOLD * scale;
    let mut count = 0;
    let mut worst = 0.0f64;
    for v in f.iter_mut() {
        if *v < 0.0 {
            if *v < floor {
                return None;
            }
            worst = worst.min(*v);
            *v = 0.0;
            count += 1;
        }
    }
    Some((count, worst))
}

/// `e^{tG} f`, the fragmentation semigroup.
pub fn semigroup_apply(ops: &DiscreteOperators, t: f64, f: &DensityField) -> Result<DensityField> {
    let mut out = semigroup_values(ops, t, f.values(), ExpBackend::Auto)?;
    // Any negative left here is round-off from a positive semigroup.
    clip_tiny(&mut out)
        .ok_or_else(|| Error::ExpAction("semigroup action lost positivity".into()))?;
    DensityField::new(f.grid().clone(), out)
}

fn semigroup_values(
    ops: &DiscreteOperators,
    t: f64,
    f: &[f64],
    backend: ExpBackend,
) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::precondition(format!(
            "semigroup time must be >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(f.to_vec());
    }
    let krylov = match backend {
        ExpBackend::Auto => ops.len() > KRYLOV_THRESHOLD,
        ExpBackend::Dense => false,
        ExpBackend::Krylov => true,
    };
    if krylov {
        let g = &ops.generator;
        linalg::krylov_expmv(|x| linalg::matvec(g, x), f, t, KrylovOptions::default())
    } else {
        Ok(linalg::matvec(&linalg::expm(&ops.generator, t)?, f))
    }
}

/// Shift `ω = 1 + max(0, s)` from an upper bound `s` on the spectral abscissa
/// of the generator, plus a small margin so that `ω > 1` strictly.
///
/// `G + σI` is nonnegative for `σ = max(-G_jj)`, so its Perron root bounds
/// every eigenvalue's real part after subtracting `σ`. The bound is the
/// Collatz–Wielandt quotient `max_j (yᵀ(G + σI))_j / y_j` minimised over a few
/// positive test vectors (mass weights, cell widths and power iterates).
pub fn estimate_omega(ops: &DiscreteOperators) -> f64 {
    let g = &ops.generator;
    let n = g.nrows();
    let sigma = g.diag().iter().fold(0.0f64, |m, &d| m.max(-d));
    let x = ops.grid.centers();
    let dx = ops.grid.widths();
    let quotient = |y: &[f64]| -> (f64, Vec<f64>) {
        let mut next = vec![0.0; n];
        for (i, row) in g.outer_iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                next[j] += y[i] * (v + if i == j { sigma } else { 0.0 });
            }
        }
        let q = next
            .iter()
            .zip(y)
            .map(|(a, b)| a / b)
            .fold(f64::NEG_INFINITY, f64::max);
        (q, next)
    };
    let mut best = f64::INFINITY;
    let starts: [Vec<f64>; 3] = [
        x.iter().zip(dx).map(|(a, b)| a * b).collect(),
        dx.to_vec(),
        vec![1.0; n],
    ];
    for start in starts {
        let mut y = start;
        for _ in 0..20 {
            if y.iter().any(|&v| !(v > 0.0)) {
                break;
            }
            let (q, next) = quotient(&y);
            best = best.min(q);
            let s: f64 = next.iter().sum();
            if !(s > 0.0) {
                break;
            }
            y = next.into_iter().map(|v| v / s).collect();
        }
    }
    let abscissa = best - sigma;
    1.0 + abscissa.max(0.0) + OMEGA_MARGIN
}

/// Keeps `ω` strictly above 1 when the spectral abscissa is zero.
pub const OMEGA_MARGIN: f64 = 1e-6;

/// Projects `spec.initial` onto the grid with the mass-preserving projection.
pub fn initial_field(spec: &ProblemSpec, grid: Arc<MassGrid>) -> Result<DensityField> {
    let init = spec.initial.clone();
    let breaks = init.breakpoints();
    DensityField::project_with_breaks(grid, move |x| init.eval(x), &breaks)
}

/// Assembles the operators, projects the initial data and integrates.
pub fn integrate(
    spec: &ProblemSpec,
    grid: Arc<MassGrid>,
    controls: &IntegratorControls,
) -> Result<SimulationTrace> {
    spec.validate()?;
    let ops = DiscreteOperators::assemble(spec, grid.clone())?;
    let f0 = initial_field(spec, grid)?;
    let omega = spec.omega.unwrap_or_else(|| estimate_omega(&ops));
    integrate_operators(&ops, f0.values(), spec.m, omega, controls)
}

struct RowBuilder<'a> {
    norms: NormContext,
    m: f64,
    alpha: f64,
    order: f64,
    above_one: Vec<bool>,
    x: &'a [f64],
    dx: &'a [f64],
}

impl RowBuilder<'_> {
    fn instantaneous(&self, f: &[f64]) -> (f64, f64) {
        let rates = self.norms.rates();
        let mut dis = 0.0;
        let mut p = 0.0;
        for j in 0..f.len() {
            if self.above_one[j] {
                let w = rates[j] * f[j].abs() * self.dx[j];
                let xi = self.x[j].powf(self.order);
                dis += w * xi;
                p += w * (1.0 + xi);
            }
        }
        (dis, p)
    }

    fn row(&self, t: f64, dt: f64, f: &[f64], prev: Option<&MomentRow>) -> MomentRow {
        let (dissipation, p) = self.instantaneous(f);
        let (di, pi) = match prev {
            Some(r) => (
                r.dissipation_integral + 0.5 * dt * (r.dissipation + dissipation),
                r.p_integral + 0.5 * dt * (r.p + p),
            ),
            None => (0.0, 0.0),
        };
        let n = &self.norms;
        let m0 = n.order(f, 0.0);
        let mm = n.order(f, self.m);
        MomentRow {
            t,
            dt,
            m0,
            m1: n.order(f, 1.0),
            m2: n.order(f, 2.0),
            mm,
            norm: m0 + mm,
            alpha_norm: n.alpha_norm(f, self.m, self.alpha),
            ledger_moment: n.order(f, self.order),
            dissipation,
            dissipation_integral: di,
            p,
            p_integral: pi,
        }
    }
}

/// Integrates prebuilt operators from `f0`.
pub fn integrate_operators(
    ops: &DiscreteOperators,
    f0: &[f64],
    m: f64,
    omega: f64,
    controls: &IntegratorControls,
) -> Result<SimulationTrace> {
    controls.validate()?;
    if f0.len() != ops.len() {
        return Err(Error::precondition("initial field does not match the grid"));
    }
    if f0.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::precondition("initial field must be nonnegative"));
    }
    let grid = ops.grid.clone();
    let norms = NormContext::new(grid.clone(), ops.fragmentation.loss.clone(), omega);
    let builder = RowBuilder {
        norms: norms.clone(),
        m,
        alpha: controls.alpha,
        order: controls.ledger_order,
        above_one: grid.centers().iter().map(|&x| x >= 1.0).collect(),
        x: grid.centers(),
        dx: grid.widths(),
    };
    let weight_norm = |f: &[f64]| norms.order(f, 0.0) + norms.order(f, m);

    let mut f = f0.to_vec();
    let mut rows = vec![builder.row(0.0, 0.0, &f, None)];
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        values: f.clone(),
    }];
    let cap = controls.blowup_factor * rows[0].alpha_norm.max(f64::MIN_POSITIVE);
    let mut steps = Vec::new();
    let mut clips = Vec::new();
    let mut stepper = ExponentialStepper::new(ops, controls.backend);

    // Dyadic ladder: level k means dt = dt_max / 2^k, one tick is the finest step.
    let kmax = if controls.is_fixed() {
        0
    } else {
        (controls.dt_max / controls.dt_min).log2().floor().max(0.0) as u32
    };
    let tick = controls.dt_max / 2f64.powi(kmax as i32);
    let end_ticks = (controls.t_final / tick + 1e-9).floor() as u64;
    let mut level = (0..=kmax)
        .find(|&k| controls.dt_max / 2f64.powi(k as i32) <= controls.dt_init * (1.0 + 1e-12))
        .unwrap_or(kmax);
    let mut ticks: u64 = 0;
    let mut accepted = 0usize;
    let mut termination = Termination::ReachedFinal;

    loop {
        let t = ticks as f64 * tick;
        let remaining = controls.t_final - t;
        if remaining <= 1e-12 * controls.t_final {
            break;
        }
        let partial = ticks >= end_ticks;
        let (dt, span) = if partial {
            (remaining, 0)
        } else {
            while (1u64 << (kmax - level)) > end_ticks - ticks {
                level += 1;
            }
            (
                controls.dt_max / 2f64.powi(level as i32),
                1u64 << (kmax - level),
            )
        };

        let (candidate, error) = if controls.is_fixed() || partial {
            (stepper.step(&f, dt)?, 0.0)
        } else {
            let full = stepper.step(&f, dt)?;
            let half = stepper.step(&f, 0.5 * dt)?;
            let two = stepper.step(&half, 0.5 * dt)?;
            let diff: Vec<f64> = two.iter().zip(&full).map(|(a, b)| a - b).collect();
            let err =
                weight_norm(&diff) / (controls.abs_tol + controls.rel_tol * weight_norm(&two));
            (two, err)
        };

        let mut candidate = candidate;
        let mut ok = error <= 1.0 && candidate.iter().all(|v| v.is_finite());
        let mut clip = None;
        if ok {
            match controls.negativity {
                NegativityPolicy::Reject => ok = candidate.iter().all(|&v| v >= 0.0),
                NegativityPolicy::ClipTiny => match clip_tiny(&mut candidate) {
                    Some((count, worst)) if count > 0 => clip = Some((count, worst)),
                    Some(_) => {}
                    None => ok = false,
                },
            }
        }
        steps.push(StepRecord {
            t,
            dt,
            error,
            accepted: ok,
        });

        if !ok {
            if partial || level >= kmax {
                log::warn!("step underflow at t = {t}: dt = {dt:e} rejected");
                termination = Termination::StepUnderflow;
                break;
            }
            level += 1;
            continue;
        }

        f = candidate;
        accepted += 1;
        let t_new = if partial {
            ticks = end_ticks;
            controls.t_final
        } else {
            ticks += span;
            ticks as f64 * tick
        };
        if let Some((count, most_negative)) = clip {
            clips.push(ClipEvent {
                t: t_new,
                count,
                most_negative,
            });
        }
        let row = builder.row(t_new, dt, &f, rows.last());
        let blown = !(row.alpha_norm <= cap);
        rows.push(row);
        if accepted % controls.snapshot_stride == 0 {
            snapshots.push(Snapshot {
                t: t_new,
                values: f.clone(),
            });
        }
        if blown {
            log::warn!("blow-up cap exceeded at t = {t_new}");
            termination = Termination::BlowupCap;
            break;
        }
        if partial {
            break;
        }
        // Grow when the step was easy and the clock is aligned to the doubled step.
        if level > 0 && error < 0.25 && ticks % (span * 2) == 0 {
            level -= 1;
        }
    }

    let last_t = rows.last().map_or(0.0, |r| r.t);
    if snapshots.last().map(|s| s.t) != Some(last_t) {
        snapshots.push(Snapshot {
            t: last_t,
            values: f.clone(),
        });
    }
    Ok(SimulationTrace {
        grid,
        m,
        alpha: controls.alpha,
        omega,
        ledger_order: controls.ledger_order,
        rows,
        snapshots,
        steps,
        clips,
        termination,
        final_state: f,
    })
}

/// Result of the smoothing probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingProbe {
    pub times: Vec<f64>,
    /// `t^α e^{-ωt} ‖G(t)f‖^{(α)}_{[0,m]} / ‖f‖_{[0,m]}`
    pub values: Vec<f64>,
    pub sup: f64,
    /// `max / min` over the probe times.
    pub variation: f64,
}

pub fn smoothing_probe(
    ops: &DiscreteOperators,
    f: &DensityField,
    m: f64,
    alpha: f64,
    omega: f64,
    times: &[f64],
) -> Result<SmoothingProbe> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::precondition(
            "probe times must be positive and nonempty",
        ));
    }
    let norms = NormContext::new(ops.grid.clone(), ops.fragmentation.loss.clone(), omega);
    let base = norms.weighted(f.values(), m);
    if !(base > 0.0) {
        return Err(Error::precondition("probe field must have positive norm"));
    }
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let g = semigroup_values(ops, t, f.values(), ExpBackend::Auto)?;
        values.push(t.powf(alpha) * (-omega * t).exp() * norms.alpha_norm(&g, m, alpha) / base);
    }
    let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SmoothingProbe {
        times: times.to_vec(),
        values,
        sup,
        variation: sup / inf,
    })
}

/// Observed temporal order from fixed-step runs at `dt`, `dt/2`, `dt/4`,
/// measured in `‖·‖_{[0,m]}` at `t_final`.
pub fn temporal_order(
    ops: &DiscreteOperators,
    f0: &[f64],
    m: f64,
    t_final: f64,
    dt: f64,
) -> Result<f64> {
    let norms = NormContext::new(
        ops.grid.clone(),
        ops.fragmentation.loss.clone(),
        1.0 + OMEGA_MARGIN,
    );
    let run = |h: f64| -> Result<Vec<f64>> {
        let controls = IntegratorControls {
            snapshot_stride: usize::MAX,
            ..IntegratorControls::fixed(t_final, h)
        };
        Ok(integrate_operators(ops, f0, m, 1.0 + OMEGA_MARGIN, &controls)?.final_state)
    };
    let u1 = run(dt)?;
    let u2 = run(dt / 2.0)?;
    let u4 = run(dt / 4.0)?;
    let d = |a: &[f64], b: &[f64]| {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norms.weighted(&diff, m)
    };
    Ok((d(&u1, &u2) / d(&u2, &u4)).log2())
}
