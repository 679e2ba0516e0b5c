use std::sync::Arc;

use fragcoal_core::diagnostics::{self, Envelope, NormContext};
use fragcoal_core::harness::RunConfig;
use fragcoal_core::solver;
use fragcoal_core::{
    CoagulationKernel, DaughterDistribution, DensityField, DiscreteOperators, FragmentationRate,
    MassGrid, ProblemSpec, Spacing,
};
use proptest::prelude::*;

/// Spacing family; explicit geometric ratios come from a span `R / x_{3/2}`
/// so every grid keeps a quarter of its cells below `R/100`.
#[derive(Clone, Copy, Debug)]
enum Sp {
    Uniform,
    Auto,
    Span(f64),
}

impl Sp {
    fn spacing(self, n: usize) -> Spacing {
        match self {
            Sp::Uniform => Spacing::Uniform,
            Sp::Auto => Spacing::Geometric { ratio: None },
            Sp::Span(s) => Spacing::Geometric {
                ratio: Some(s.powf(1.0 / (n - 1) as f64)),
            },
        }
    }
}

fn spacing() -> impl Strategy<Value = Sp> {
    prop_oneof![
        Just(Sp::Uniform),
        Just(Sp::Auto),
        (1e3f64..1e8).prop_map(Sp::Span)
    ]
}

fn kernel() -> impl Strategy<Value = CoagulationKernel> {
    prop_oneof![
        (0.1f64..2.0).prop_map(CoagulationKernel::constant),
        (0.01f64..0.5).prop_map(|scale| CoagulationKernel::Sum { scale }),
        (0.001f64..0.05).prop_map(|scale| CoagulationKernel::Product { scale }),
        (0.1f64..2.0, 0.05f64..0.95)
            .prop_map(|(scale, alpha)| CoagulationKernel::Dominated { scale, alpha }),
        (0.1f64..2.0, 0.05f64..0.95)
            .prop_map(|(scale, alpha)| CoagulationKernel::DominatedSum { scale, alpha }),
    ]
}

fn setup(radius: f64, n: usize, spacing: Sp, nu: f64, k: CoagulationKernel) -> DiscreteOperators {
    let spec = ProblemSpec::new(
        FragmentationRate::power(1.0, 1.0),
        DaughterDistribution::powerlaw(nu),
        k,
        2.0,
    );
    let grid = Arc::new(MassGrid::build(radius, n, spacing.spacing(n)).unwrap());
    DiscreteOperators::assemble(&spec, grid).unwrap()
}

fn field(ops: &DiscreteOperators, seeds: &[f64], decay: f64) -> Vec<f64> {
    ops.grid
        .centers()
        .iter()
        .zip(seeds.iter().cycle())
        .map(|(&x, &s)| s * (-decay * x).exp())
        .collect()
}

fn weighted_sum(ops: &DiscreteOperators, v: &[f64], w: impl Fn(f64) -> f64) -> f64 {
    let x = ops.grid.centers();
    let dx = ops.grid.widths();
    (0..v.len()).map(|j| w(x[j]) * dx[j] * v[j]).sum()
}

fn abs_scale(ops: &DiscreteOperators, v: &[f64], w: impl Fn(f64) -> f64) -> f64 {
    let x = ops.grid.centers();
    let dx = ops.grid.widths();
    (0..v.len())
        .map(|j| (w(x[j]) * dx[j] * v[j]).abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grids_tile_the_interval(radius in 1.0f64..200.0, n in 8usize..300, sp in spacing()) {
        let g = MassGrid::build(radius, n, sp.spacing(n)).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g.edges()[0], 0.0);
        prop_assert!((g.radius() - radius).abs() <= 1e-12 * radius);
        prop_assert!(g.edges().windows(2).all(|w| w[0] < w[1]));
        let total: f64 = g.widths().iter().sum();
        prop_assert!((total - radius).abs() <= 1e-10 * radius);
        for (j, &x) in g.centers().iter().enumerate() {
            prop_assert!(g.edges()[j] < x && x < g.edges()[j + 1]);
        }
    }

    #[test]
    fn prefix_grids_share_cells(n in 16usize..200, keep in 8usize..16) {
        let g = MassGrid::build(50.0, n, Spacing::default()).unwrap();
        let p = g.prefix(keep).unwrap();
        prop_assert_eq!(p.edges(), &g.edges()[..=keep]);
        prop_assert_eq!(g.cells_within(p.radius()), keep);
    }

    #[test]
    fn fragmentation_conserves_mass(
        n in 8usize..160,
        sp in spacing(),
        nu in -0.9f64..=0.0,
        seeds in prop::collection::vec(0.0f64..1.0, 1..16),
        decay in 0.05f64..3.0,
    ) {
        let ops = setup(32.0, n, sp, nu, CoagulationKernel::zero());
        let f = field(&ops, &seeds, decay);
        let ff = ops.apply_fragmentation(&f);
        let mass = weighted_sum(&ops, &ff, |x| x);
        prop_assert!(mass.abs() <= 1e-12 * abs_scale(&ops, &ff, |x| x));
        // fragmentation never lowers the particle count
        prop_assert!(weighted_sum(&ops, &ff, |_| 1.0) >= -1e-12 * abs_scale(&ops, &ff, |_| 1.0));
    }

    #[test]
    fn coagulation_conserves_mass_and_matches_weak_form(
        n in 8usize..96,
        sp in spacing(),
        k in kernel(),
        seeds in prop::collection::vec(0.0f64..1.0, 1..16),
        decay in 0.05f64..3.0,
    ) {
        let ops = setup(16.0, n, sp, 0.0, k);
        let f = field(&ops, &seeds, decay);
        let cf = ops.apply_coagulation(&f);
        let mass = weighted_sum(&ops, &cf, |x| x);
        prop_assert!(mass.abs() <= 1e-12 * abs_scale(&ops, &cf, |x| x));
        // coagulation never raises the particle count
        prop_assert!(weighted_sum(&ops, &cf, |_| 1.0) <= 1e-12 * abs_scale(&ops, &cf, |_| 1.0));
        let theta = |x: f64| 1.0 + x * x;
        let direct = weighted_sum(&ops, &cf, theta);
        let weak = ops.weak_form_theta(&f, theta);
        prop_assert!((direct - weak).abs() <= 1e-10 * abs_scale(&ops, &cf, theta));
    }

    #[test]
    fn exponential_step_keeps_mass_and_sign(
        n in 8usize..64,
        k in kernel(),
        seeds in prop::collection::vec(0.0f64..1.0, 1..8),
        dt in 1e-3f64..0.1,
    ) {
        let ops = setup(16.0, n, Sp::Auto, 0.0, k);
        let f = DensityField::new(ops.grid.clone(), field(&ops, &seeds, 1.0)).unwrap();
        let g = solver::step_exponential(&ops, &f, dt).unwrap();
        prop_assert!(g.values().iter().all(|&v| v >= -1e-12));
        let (m0, m1) = (f.moment(1.0), g.moment(1.0));
        prop_assert!((m0 - m1).abs() <= 1e-10 * m0.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn semigroup_is_positive_and_conservative(
        n in 8usize..64,
        j in 0usize..64,
        t in 1e-4f64..2.0,
    ) {
        let ops = setup(16.0, n, Sp::Auto, 0.0, CoagulationKernel::zero());
        let f = DensityField::indicator(ops.grid.clone(), j % n, 1.0);
        let g = solver::semigroup_apply(&ops, t, &f).unwrap();
        prop_assert!(g.values().iter().all(|&v| v >= -1e-12));
        prop_assert!((g.moment(1.0) - f.moment(1.0)).abs() <= 1e-10 * f.moment(1.0));
        prop_assert!(g.moment(0.0) >= f.moment(0.0) * (1.0 - 1e-12));
    }

    #[test]
    fn projection_preserves_mass(rate in 0.2f64..5.0, n in 8usize..128) {
        let grid = Arc::new(MassGrid::build(40.0, n, Spacing::default()).unwrap());
        let f = DensityField::project(grid, |x| (-rate * x).exp()).unwrap();
        let exact = (1.0 - (1.0 + 40.0 * rate) * (-40.0 * rate).exp()) / (rate * rate);
        prop_assert!((f.moment(1.0) - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn deficit_sign_pattern(nu in -0.99f64..=0.0, y in 1e-3f64..1e6, m in 0.0f64..8.0) {
        let d = DaughterDistribution::powerlaw(nu).moment_deficit(y, m).unwrap();
        if m > 1.0 {
            prop_assert!(d > 0.0);
        } else if m < 1.0 {
            prop_assert!(d < 0.0);
        }
        prop_assert_eq!(DaughterDistribution::powerlaw(nu).moment_deficit(y, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn elementary_inequalities_hold(
        m in 1.0f64..6.0,
        frac in 0.0f64..=1.0,
        pts in prop::collection::vec((1e-6f64..1e4, 1e-6f64..1e4), 1..50),
    ) {
        let r = diagnostics::elementary_battery(m, frac * m, &pts).unwrap();
        prop_assert!(r.passed, "{:?}", r.max_violation);
    }

    #[test]
    fn superadditivity_constant_is_frozen(
        m in 1.1f64..4.0,
        cal in prop::collection::vec((1e-3f64..1e3, 1e-3f64..1e3), 1..40),
    ) {
        let cm = diagnostics::fit_superadditivity(m, &cal).unwrap();
        let r = diagnostics::monitor_superadditivity(m, cm, &cal, 0.0);
        prop_assert!(r.max_violation <= 1e-12);
    }

    #[test]
    fn envelope_covers_its_calibration(
        d1 in 0.0f64..3.0,
        series in prop::collection::vec(0.1f64..10.0, 2..40),
    ) {
        let times: Vec<f64> = (0..series.len()).map(|k| 0.1 * k as f64).collect();
        let env = Envelope::fit(&times, &series, d1, 0.05);
        for (&t, &s) in times.iter().zip(&series) {
            prop_assert!(s <= env.eval(t) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn norms_are_monotone_in_alpha(
        seeds in prop::collection::vec(0.0f64..1.0, 1..16),
        a1 in 0.0f64..1.0,
        a2 in 0.0f64..1.0,
    ) {
        let ops = setup(32.0, 64, Sp::Auto, 0.0, CoagulationKernel::zero());
        let norms = NormContext::from_operators(&ops, 1.5);
        let f = field(&ops, &seeds, 0.5);
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        prop_assert!(norms.alpha_norm(&f, 2.0, lo) <= norms.alpha_norm(&f, 2.0, hi) * (1.0 + 1e-12));
        prop_assert!((norms.alpha_norm(&f, 2.0, 0.0) - norms.weighted(&f, 2.0)).abs() <= 1e-12 * norms.weighted(&f, 2.0));
    }
}

#[test]
fn config_round_trips_through_json() {
    let cfg = RunConfig::bundled();
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    assert_eq!(RunConfig::parse(&text, "round-trip").unwrap(), cfg);
}
