//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! status 1 if any criterion fails.
//!
//! Set `ACCEPTANCE_ONLY=1,5,7` to run a subset.

use std::process::ExitCode;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use fragcoal_core::admissibility::{self, DominationMode, ProbeSettings};
use fragcoal_core::diagnostics::{self, NormContext};
use fragcoal_core::harness::{self, RunConfig, SimulationOutcome};
use fragcoal_core::linalg;
use fragcoal_core::solver::{self, IntegratorControls};
use fragcoal_core::{
    CoagulationKernel, DaughterDistribution, DensityField, DiscreteOperators, FragmentationRate,
    MassGrid, ProblemSpec, Spacing, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;

// ---------------------------------------------------------------------------
// test-local oracles

const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss–Legendre rule on `panels` equal panels.
fn gauss(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = lo + (p as f64 + 0.5) * h;
        for (x, w) in GL_X.iter().zip(GL_W) {
            s += w * f(c + 0.5 * h * x);
        }
    }
    0.5 * h * s
}

/// `(1 + t)² e^{-x(1+t)}` solves the problem with `a = x`, `b = 2/y`, `k = 0`.
fn frag_exact(t: f64, x: f64) -> f64 {
    (1.0 + t).powi(2) * (-x * (1.0 + t)).exp()
}

fn frag_exact_dt(t: f64, x: f64) -> f64 {
    let s = 1.0 + t;
    (2.0 * s - x * s * s) * (-x * s).exp()
}

/// `4 (2 + t)^{-2} e^{-2x/(2+t)}` solves the problem with `a = 0`, `k = 1`.
fn coag_exact(t: f64, x: f64) -> f64 {
    let s = 2.0 + t;
    4.0 / (s * s) * (-2.0 * x / s).exp()
}

fn coag_exact_dt(t: f64, x: f64) -> f64 {
    let s = 2.0 + t;
    (-8.0 / s.powi(3) + 8.0 * x / s.powi(4)) * (-2.0 * x / s).exp()
}

/// Mass-weighted cell averages `∫ x f / (x_j Δ_j)`.
fn project(grid: &MassGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let e = grid.edges();
    let x = grid.centers();
    let dx = grid.widths();
    (0..grid.len())
        .map(|j| gauss(|s| s * f(s), e[j], e[j + 1], 8) / (x[j] * dx[j]))
        .collect()
}

fn relative_l1(grid: &MassGrid, u: &[f64], exact: &[f64]) -> f64 {
    let dx = grid.widths();
    let num: f64 = (0..u.len()).map(|j| (u[j] - exact[j]).abs() * dx[j]).sum();
    let den: f64 = (0..u.len()).map(|j| exact[j].abs() * dx[j]).sum();
    num / den
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi / lo).ln() * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn grid(radius: f64, n: usize) -> Result<Arc<MassGrid>, String> {
    MassGrid::build(radius, n, Spacing::default())
        .map(Arc::new)
        .map_err(|e| e.to_string())
}

fn state_at(trace: &fragcoal_core::SimulationTrace, t: f64) -> Result<Vec<f64>, String> {
    trace
        .snapshots
        .iter()
        .find(|s| (s.t - t).abs() < 1e-9)
        .map(|s| s.values.clone())
        .ok_or_else(|| format!("no snapshot at t = {t}"))
}

fn fixed_run(
    ops: &DiscreteOperators,
    f0: &[f64],
    t_final: f64,
    dt: f64,
) -> Result<fragcoal_core::SimulationTrace, String> {
    let controls = IntegratorControls {
        snapshot_stride: 1,
        ..IntegratorControls::fixed(t_final, dt)
    };
    let omega = solver::estimate_omega(ops);
    solver::integrate_operators(ops, f0, 2.0, omega, &controls).map_err(|e| e.to_string())
}

fn random_fields(grid: &MassGrid, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let decay = rng.random_range(0.2..3.0);
            let amp = rng.random_range(0.1..10.0);
            grid.centers()
                .iter()
                .map(|&x| amp * rng.random::<f64>() * (-decay * x).exp())
                .collect()
        })
        .collect()
}

fn e(err: impl ToString) -> String {
    err.to_string()
}

// ---------------------------------------------------------------------------
// shared full-model run

struct FullRun {
    outcome: SimulationOutcome,
    elapsed: Duration,
}

fn full_run() -> Result<&'static FullRun, String> {
    static RUN: OnceLock<Result<FullRun, String>> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut cfg = RunConfig::full_model();
        cfg.grid.radius = 64.0;
        cfg.grid.cells = 512;
        cfg.controls.t_final = 5.0;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(e)?;
        let start = Instant::now();
        let outcome = pool
            .install(|| harness::run_simulation(&cfg, false))
            .map_err(e)?;
        Ok(FullRun {
            outcome,
            elapsed: start.elapsed(),
        })
    })
    .as_ref()
    .map_err(Clone::clone)
}

// ---------------------------------------------------------------------------
// criteria

fn mass_conservation() -> Check {
    let run = full_run()?;
    let trace = &run.outcome.trace;
    let drift = trace
        .rows
        .iter()
        .map(|r| (r.m1 - 1.0).abs())
        .fold(0.0, f64::max);
    let secs = run.elapsed.as_secs_f64();
    let reached = trace.termination == Termination::ReachedFinal;
    Ok((
        drift <= 1e-6 && reached && secs < 60.0,
        format!(
            "max |M1-1| = {drift:.3e} over {} rows to t = {}, runtime {secs:.1} s (single thread)",
            trace.rows.len(),
            trace.final_time()
        ),
    ))
}

fn fragmentation_oracle() -> Check {
    // substitution residual of the closed form
    let mut residual = 0.0f64;
    for &t in &[0.0, 0.5, 1.0, 2.0] {
        for x in log_space(1e-3, 20.0, 40) {
            let s = 1.0 + t;
            let tail = 2.0 * gauss(|y| frag_exact(t, y), x, x + 60.0 / s, 200);
            let rhs = -x * frag_exact(t, x) + tail;
            let lhs = frag_exact_dt(t, x);
            let scale = (x * frag_exact(t, x)).abs() + tail.abs();
            residual = residual.max((lhs - rhs).abs() / scale);
        }
    }

    let spec = ProblemSpec::new(
        FragmentationRate::power(1.0, 1.0),
        DaughterDistribution::uniform(),
        CoagulationKernel::zero(),
        2.0,
    );
    let mut errors = Vec::new();
    for n in [128, 256, 512] {
        let g = grid(64.0, n)?;
        let ops = DiscreteOperators::assemble(&spec, g.clone()).map_err(e)?;
        let f0 = project(&g, |x| frag_exact(0.0, x));
        // linear problem: exponential Euler is exact in time
        let trace = fixed_run(&ops, &f0, 1.0, 0.5)?;
        let u = state_at(&trace, 1.0)?;
        errors.push(relative_l1(&g, &u, &project(&g, |x| frag_exact(1.0, x))));
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        residual <= 1e-10 && errors[2] <= 1e-2 && min_order >= 1.0,
        format!(
            "residual {residual:.2e}, L1(t=1) at n=128/256/512: {:.3e} / {:.3e} / {:.3e}, orders {:.2} / {:.2}",
            errors[0], errors[1], errors[2], orders[0], orders[1]
        ),
    ))
}

fn coagulation_oracle() -> Check {
    let mut residual = 0.0f64;
    for &t in &[0.0, 0.5, 1.0] {
        let total = gauss(|y| coag_exact(t, y), 0.0, 40.0 * (2.0 + t), 400);
        for x in log_space(1e-3, 20.0, 40) {
            let gain = 0.5 * gauss(|y| coag_exact(t, y) * coag_exact(t, x - y), 0.0, x, 20);
            let loss = coag_exact(t, x) * total;
            let lhs = coag_exact_dt(t, x);
            residual = residual.max((lhs - gain + loss).abs() / (gain.abs() + loss.abs()));
        }
    }

    let spec = ProblemSpec::new(
        FragmentationRate::zero(),
        DaughterDistribution::uniform(),
        CoagulationKernel::constant(1.0),
        2.0,
    );
    let g = grid(64.0, 512)?;
    let ops = DiscreteOperators::assemble(&spec, g.clone()).map_err(e)?;
    let f0 = project(&g, |x| coag_exact(0.0, x));
    // Richardson extrapolation in time
    let h = 2e-3;
    let coarse = state_at(&fixed_run(&ops, &f0, 1.0, h)?, 1.0)?;
    let fine = state_at(&fixed_run(&ops, &f0, 1.0, 0.5 * h)?, 1.0)?;
    let u: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| 2.0 * f - c).collect();
    let dx = g.widths();
    let m0: f64 = u.iter().zip(dx).map(|(v, d)| v * d).sum();
    let l1 = relative_l1(&g, &u, &project(&g, |x| coag_exact(1.0, x)));
    let m0_exact = gauss(|x| coag_exact(1.0, x), 0.0, 200.0, 400);
    Ok((
        (m0 - 2.0 / 3.0).abs() <= 2e-3 && l1 <= 1e-2 && residual <= 1e-10,
        format!(
            "M0(1) = {m0:.6} (oracle {m0_exact:.6}), L1(t=1) = {l1:.3e}, residual {residual:.2e}"
        ),
    ))
}

fn truncation() -> Check {
    let cfg = RunConfig::full_model();
    let table = harness::run_truncation_study(&cfg).map_err(e)?;
    let mut ok = table.rows.len() == 3;
    for w in table.rows.windows(2) {
        let (prev, next) = (w[0].sup_alpha_error, w[1].sup_alpha_error);
        ok &= w[1].saturated || (next < prev && prev / next >= 2.0);
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            format!(
                "r={}: {:.3e}{}",
                r.radius,
                r.sup_alpha_error,
                if r.saturated { " (saturated)" } else { "" }
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, format!("{rows}; floor {:.2e}", table.floor)))
}

fn miyadera() -> Check {
    let cfg = RunConfig::bundled();
    let report = admissibility::audit(&cfg.problem, &cfg.probe, None).map_err(e)?;
    let mc = report
        .miyadera
        .as_ref()
        .ok_or("no Miyadera constants emitted")?;

    // independent c' = sup_{y >= 1} n_2(y) / y^2 and gamma = (1 + c') / 2
    let cprime = log_space(1.0, 1e6, 200)
        .into_iter()
        .map(|y| gauss(|x| x * x * 2.0 / y, 0.0, y, 4) / (y * y))
        .fold(0.0, f64::max);
    let gamma = 0.5 * (1.0 + cprime);

    // dense re-check of both inequalities with the emitted constants
    let bound = 0.25 * (1.0 - mc.cprime);
    let (b0, l, m) = (report.b0, report.l, report.m);
    let mut violations = 0;
    for x in log_space(mc.r, 1e8, 10_000) {
        if b0 * (1.0 + x.powf(l)) / (1.0 + x.powf(m)) > bound * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    for k in 0..10_000 {
        let x = mc.r * k as f64 / 9_999.0;
        if x * b0 * (1.0 + x.powf(l)) / (x + mc.zeta) > bound * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    let ok = (mc.cprime - 2.0 / 3.0).abs() <= 1e-9
        && (mc.gamma - 5.0 / 6.0).abs() <= 1e-9
        && (cprime - 2.0 / 3.0).abs() <= 1e-12
        && (gamma - 5.0 / 6.0).abs() <= 1e-12
        && mc.samples >= 10_000
        && mc.violations == 0
        && violations == 0;
    Ok((
        ok,
        format!(
            "c' = {:.12}, gamma = {:.12}, r = {:.4}, zeta = {:.4}; {} tool samples with {} violations, {} local violations",
            mc.cprime, mc.gamma, mc.r, mc.zeta, mc.samples, mc.violations, violations
        ),
    ))
}

fn deficit_structure() -> Check {
    const QUAD_TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ms: Vec<f64> = (0..=98).map(|k| 1.1 + 0.05 * k as f64).collect();
    let (mut sign_fail, mut mono_fail, mut concave_fail) = (0, 0, 0);
    let mut quad_err = 0.0f64;
    for _ in 0..100 {
        let nu = -rng.random_range(0.0..0.95);
        let y = 10f64.powf(rng.random_range(0.0..6.0));
        let b = DaughterDistribution::powerlaw(nu);
        let deficit = |m: f64| b.moment_deficit(y, m).map_err(e);

        for m in [0.0, 0.25, 0.5, 0.9, 0.99] {
            sign_fail += usize::from(!(deficit(m)? < 0.0));
        }
        sign_fail += usize::from(deficit(1.0)? != 0.0);
        let g: Vec<f64> = ms
            .iter()
            .map(|&m| deficit(m).map(|d| d / y.powf(m)))
            .collect::<Result<_, _>>()?;
        for (&m, &v) in ms.iter().zip(&g) {
            sign_fail += usize::from(!(v > 0.0));
            // n_m by local quadrature on dyadic panels toward the singular endpoint
            let n_m: f64 = (0..80)
                .map(|k| {
                    let hi = y * 0.5f64.powi(k);
                    gauss(
                        |x| x.powf(m) * (nu + 2.0) * x.powf(nu) / y.powf(nu + 1.0),
                        0.5 * hi,
                        hi,
                        4,
                    )
                })
                .sum();
            quad_err = quad_err.max(((1.0 - n_m / y.powf(m)) - v).abs());
        }
        for w in g.windows(2) {
            mono_fail += usize::from(w[1] - w[0] < -QUAD_TOL);
        }
        for w in g.windows(3) {
            concave_fail += usize::from(w[0] - 2.0 * w[1] + w[2] > QUAD_TOL);
        }
    }
    Ok((
        sign_fail == 0 && mono_fail == 0 && concave_fail == 0 && quad_err <= QUAD_TOL,
        format!(
            "100 probes: {sign_fail} sign, {mono_fail} monotonicity, {concave_fail} concavity violations; quadrature gap {quad_err:.2e}"
        ),
    ))
}

fn weak_form() -> Check {
    let cfg = RunConfig::full_model();
    let g = grid(64.0, 512)?;
    let ops = DiscreteOperators::assemble(&cfg.problem, g.clone()).map_err(e)?;
    let thetas: [(&str, fn(f64) -> f64); 4] = [
        ("1", |_| 1.0),
        ("x", |x| x),
        ("x^2", |x| x * x),
        ("1+x^2", |x| 1.0 + x * x),
    ];
    let x = g.centers();
    let dx = g.widths();
    let mut worst = 0.0f64;
    for f in random_fields(&g, 50, 7) {
        let cf = ops.apply_coagulation(&f);
        for (_, theta) in &thetas {
            let direct: f64 = (0..f.len()).map(|j| theta(x[j]) * dx[j] * cf[j]).sum();
            let scale: f64 = (0..f.len())
                .map(|j| (theta(x[j]) * dx[j] * cf[j]).abs())
                .sum();
            let weak = ops.weak_form_theta(&f, theta);
            worst = worst.max((direct - weak).abs() / scale.max(f64::MIN_POSITIVE));
        }
    }
    Ok((
        worst <= 1e-10,
        format!("50 fields x 4 weights, worst relative gap {worst:.2e}"),
    ))
}

fn smoothing() -> Check {
    let (m, alpha) = (2.0, 0.5);
    let spec = ProblemSpec::new(
        FragmentationRate::power(1.0, 1.0),
        DaughterDistribution::uniform(),
        CoagulationKernel::zero(),
        m,
    );
    let g = grid(64.0, 512)?;
    let ops = DiscreteOperators::assemble(&spec, g.clone()).map_err(e)?;
    let omega = solver::estimate_omega(&ops);
    let times = log_space(1e-4, 1e-1, 13);
    let generator = ops.fragmentation.generator(&g);
    let x = g.centers();
    let dx = g.widths();
    let rates = &ops.fragmentation.loss;
    let n = g.len();

    // every single-cell datum at once: the columns of G(t)
    let mut values = vec![Vec::with_capacity(times.len()); n];
    for &t in &times {
        let gt = linalg::expm(&generator, t).map_err(e)?;
        for (j, vj) in values.iter_mut().enumerate() {
            let num: f64 = (0..n)
                .map(|i| {
                    gt[[i, j]].abs() * (omega + rates[i]).powf(alpha) * (1.0 + x[i].powf(m)) * dx[i]
                })
                .sum();
            vj.push(t.powf(alpha) * (-omega * t).exp() * num / ((1.0 + x[j].powf(m)) * dx[j]));
        }
    }
    let sup = |j: usize| values[j].iter().copied().fold(0.0, f64::max);
    let variation = |j: usize| sup(j) / values[j].iter().copied().fold(f64::INFINITY, f64::min);

    // worst case: the cell maximizing ‖f‖^{(α)} / ‖f‖, i.e. the largest rate
    let worst = (0..n)
        .max_by(|&a, &b| rates[a].total_cmp(&rates[b]))
        .expect("nonempty grid");
    let probe = solver::smoothing_probe(
        &ops,
        &DensityField::indicator(g.clone(), worst, 1.0),
        m,
        alpha,
        omega,
        &times,
    )
    .map_err(e)?;
    let agree = (probe.sup - sup(worst)).abs() <= 1e-8 * sup(worst)
        && (probe.variation - variation(worst)).abs() <= 1e-8 * variation(worst);
    let peak = (0..n)
        .max_by(|&a, &b| sup(a).total_cmp(&sup(b)))
        .expect("nonempty grid");
    Ok((
        probe.variation < 10.0 && agree,
        format!(
            "cell {worst} (x = {:.3}): sup {:.4}, variation {:.3} over t in [1e-4, 1e-1]; \
             largest sup at cell {peak} (x = {:.3}): sup {:.4}, variation {:.3}",
            x[worst],
            probe.sup,
            probe.variation,
            x[peak],
            sup(peak),
            variation(peak)
        ),
    ))
}

fn battery() -> Check {
    const MARGIN: f64 = 0.05;
    let settings = ProbeSettings::default();
    let mut cfg = RunConfig::bundled();
    let g = grid(cfg.grid.radius, cfg.grid.cells)?;
    let (m, alpha) = (2.0, 0.5);
    let mut lines = Vec::new();
    let mut ok = true;

    // bilinear bound under product domination
    let report = admissibility::audit(&cfg.problem, &settings, None).map_err(e)?;
    let fit = report
        .domination
        .iter()
        .find(|d| d.mode == DominationMode::PointwiseProduct && d.passed)
        .ok_or("product domination not established")?;
    let ops = DiscreteOperators::assemble(&cfg.problem, g.clone()).map_err(e)?;
    let norms = NormContext::from_operators(&ops, solver::estimate_omega(&ops));
    let fs = random_fields(&g, 100, 91);
    let gs = random_fields(&g, 100, 92);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = fs.iter().cloned().zip(gs).collect();
    let r = diagnostics::monitor_bilinear_bound(&ops, &norms, &pairs, m, fit.alpha, fit.k, MARGIN);
    ok &= r.passed && r.residuals.len() == 100;
    lines.push(format!("bilinear {:.3e}", r.max_violation));

    // one-sided bound under sum domination
    cfg.problem.coagulation = CoagulationKernel::DominatedSum {
        scale: 1.0,
        alpha: 0.5,
    };
    let report = admissibility::audit(&cfg.problem, &settings, None).map_err(e)?;
    let fit = report
        .domination
        .iter()
        .find(|d| d.mode == DominationMode::PointwiseSum && d.passed)
        .ok_or("sum domination not established")?;
    let ops_sum = DiscreteOperators::assemble(&cfg.problem, g.clone()).map_err(e)?;
    let norms_sum = NormContext::from_operators(&ops_sum, solver::estimate_omega(&ops_sum));
    let r = diagnostics::monitor_one_sided_bound(
        &ops_sum, &norms_sum, &fs, m, fit.alpha, fit.k, MARGIN,
    );
    ok &= r.passed && r.residuals.len() == 100;
    lines.push(format!("one-sided {:.3e}", r.max_violation));

    // Hölder interpolation
    let fields = random_fields(&g, 100, 93);
    for (i, r_order) in [(2.0, 1.0), (3.0, 2.0), (4.0, 1.5)] {
        let r =
            diagnostics::monitor_holder_interpolation(&norms, &fields, i, r_order, alpha, MARGIN)
                .map_err(e)?;
        ok &= r.passed;
        lines.push(format!("holder[i={i},r={r_order}] {:.3e}", r.max_violation));
    }

    // superadditivity: c_m fitted on one sample, frozen, tested on another
    let mut rng = ChaCha8Rng::seed_from_u64(94);
    let mut points = |k: usize| -> Vec<(f64, f64)> {
        (0..k)
            .map(|_| {
                (
                    10f64.powf(rng.random_range(-4.0..4.0)),
                    10f64.powf(rng.random_range(-4.0..4.0)),
                )
            })
            .collect()
    };
    let calibration = points(200);
    let test = points(100);
    for mm in [2.0, 3.0] {
        let cm = diagnostics::fit_superadditivity(mm, &calibration).map_err(e)?;
        let r = diagnostics::monitor_superadditivity(mm, cm, &test, MARGIN);
        ok &= r.passed;
        lines.push(format!(
            "superadditivity[m={mm}] c={cm:.3} {:.3e}",
            r.max_violation
        ));
    }
    Ok((ok, format!("max violations: {}", lines.join(", "))))
}

fn moment_boundedness() -> Check {
    let run = full_run()?;
    let trace = &run.outcome.trace;
    let ledger = run
        .outcome
        .ledger
        .as_ref()
        .ok_or("ledger monitor did not run")?;
    let no_blowup =
        trace.termination == Termination::ReachedFinal && (trace.final_time() - 5.0).abs() < 1e-9;
    let parts = [&ledger.m0, &ledger.m2, &ledger.phi, &ledger.p]
        .iter()
        .map(|s| format!("{} {:.3e}", s.name, s.max_excess))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((
        ledger.passed() && no_blowup,
        format!(
            "max s/E - 1: {parts}; termination {:?} at t = {}",
            trace.termination,
            trace.final_time()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("mass conservation", mass_conservation),
        ("pure-fragmentation oracle", fragmentation_oracle),
        ("pure-coagulation oracle", coagulation_oracle),
        ("truncation convergence", truncation),
        ("Miyadera constants", miyadera),
        ("N_m structure", deficit_structure),
        ("weak-form equivalence", weak_form),
        ("smoothing probe", smoothing),
        ("inequality battery", battery),
        ("moment boundedness", moment_boundedness),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());

    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = check().unwrap_or_else(|err| (false, format!("error: {err}")));
        failed += usize::from(!passed);
        println!(
            "criterion {id:>2} {name:<27} {} ({:.1} s) {detail}",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
