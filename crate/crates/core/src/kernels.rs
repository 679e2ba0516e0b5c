//! Fragmentation rate `a`, daughter distribution `b` and coagulation kernel `k`,
//! together with the partial moments `n_m(y) = ∫_0^y b(x,y) x^m dx` and the
//! deficits `N_m(y) = y^m - n_m(y)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::tables::{Table1d, Table2d};

fn one() -> f64 {
    1.0
}

fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::MalformedKernel(format!(
            "{what} evaluated to {value}"
        )))
    }
}

/// One term `a0 * x^gamma` of a composite rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub a0: f64,
    pub gamma: f64,
}

/// Overall fragmentation rate `a(x) >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FragmentationRate {
    /// `a0 * x^gamma`
    Power {
        a0: f64,
        gamma: f64,
    },
    /// Sum of power terms.
    Composite {
        terms: Vec<PowerTerm>,
    },
    Table(Table1d),
}

impl FragmentationRate {
    pub fn power(a0: f64, gamma: f64) -> Self {
        FragmentationRate::Power { a0, gamma }
    }

    pub fn zero() -> Self {
        FragmentationRate::Power {
            a0: 0.0,
            gamma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FragmentationRate::Power { a0, gamma } => {
                if !(*a0 >= 0.0 && a0.is_finite() && gamma.is_finite()) {
                    return Err(Error::MalformedKernel(format!(
                        "power rate needs a0 >= 0 and finite gamma, got a0={a0}, gamma={gamma}"
                    )));
                }
            }
            FragmentationRate::Composite { terms } => {
                if terms.is_empty() {
                    return Err(Error::MalformedKernel("composite rate has no terms".into()));
                }
                for t in terms {
                    FragmentationRate::Power {
                        a0: t.a0,
                        gamma: t.gamma,
                    }
                    .validate()?;
                }
            }
            FragmentationRate::Table(t) => {
                t.validate()?;
                if t.values.iter().any(|&v| v < 0.0) {
                    return Err(Error::MalformedKernel(
                        "tabulated rate has negative values".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FragmentationRate::Power { a0, .. } => *a0 == 0.0,
            FragmentationRate::Composite { terms } => terms.iter().all(|t| t.a0 == 0.0),
            FragmentationRate::Table(t) => t.values.iter().all(|&v| v == 0.0),
        }
    }

    pub fn is_heuristic(&self) -> bool {
        matches!(self, FragmentationRate::Table(_))
    }

    /// `a(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::precondition(format!(
                "fragmentation rate needs x >= 0, got {x}"
            )));
        }
        let v = match self {
            FragmentationRate::Power { a0, gamma } => power_term(*a0, *gamma, x),
            FragmentationRate::Composite { terms } => {
                terms.iter().map(|t| power_term(t.a0, t.gamma, x)).sum()
            }
            FragmentationRate::Table(t) => t.eval(x),
        };
        finite(v, "fragmentation rate")
    }

    /// Supremum of `a` over `[lo, hi]`; closed form for a single power,
    /// dense sampling (plus endpoints and table nodes) otherwise.
    pub fn sup_on(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(0.0 <= lo && lo <= hi) {
            return Err(Error::precondition(format!(
                "sup_on needs 0 <= lo <= hi, got [{lo}, {hi}]"
            )));
        }
        match self {
            FragmentationRate::Power { a0, gamma } => {
                if *a0 == 0.0 {
                    Ok(0.0)
                } else if *gamma >= 0.0 {
                    self.eval(hi)
                } else {
                    self.eval(lo)
                }
            }
            _ => {
                let samples = 10_000;
                let mut best = self.eval(lo)?.max(self.eval(hi)?);
                for k in 1..samples {
                    let x = lo + (hi - lo) * k as f64 / samples as f64;
                    best = best.max(self.eval(x)?);
                }
                if let FragmentationRate::Table(t) = self {
                    for (&x, &v) in t.x.iter().zip(&t.values) {
                        if (lo..=hi).contains(&x) {
                            best = best.max(v);
                        }
                    }
                }
                Ok(best)
            }
        }
    }

    pub fn resolve_tables(&mut self, base: &Path) -> Result<()> {
        if let FragmentationRate::Table(t) = self {
            t.resolve(base)?;
        }
        self.validate()
    }
}

fn power_term(a0: f64, gamma: f64, x: f64) -> f64 {
    if a0 == 0.0 {
        0.0
    } else if gamma == 0.0 {
        a0
    } else {
        a0 * x.powf(gamma)
    }
}

/// Daughter distribution `b(x, y)`: density of fragments of mass `x` produced
/// by the breakup of a parent of mass `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DaughterDistribution {
    /// `scale * (nu + 2) x^nu / y^(nu + 1)` on `0 < x < y`, `nu ∈ (-2, 0]`.
    /// Mass conserving exactly when `scale == 1`.
    Powerlaw {
        nu: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Table(Table2d),
}

impl DaughterDistribution {
    pub fn powerlaw(nu: f64) -> Self {
        DaughterDistribution::Powerlaw { nu, scale: 1.0 }
    }

    /// `b(x, y) = 2 / y`.
    pub fn uniform() -> Self {
        Self::powerlaw(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DaughterDistribution::Powerlaw { nu, scale } => {
                if !(*nu > -2.0 && *nu <= 0.0) {
                    return Err(Error::MalformedKernel(format!(
                        "power-law daughter distribution needs nu in (-2, 0], got {nu}"
                    )));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::MalformedKernel(format!(
                        "scale must be positive, got {scale}"
                    )));
                }
            }
            DaughterDistribution::Table(t) => {
                t.validate()?;
                if t.values.iter().any(|&v| v < 0.0) {
                    return Err(Error::MalformedKernel(
                        "tabulated daughter distribution has negative values".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_heuristic(&self) -> bool {
        matches!(self, DaughterDistribution::Table(_))
    }

    /// `b(x, y)`; zero for `x > y`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::precondition(format!(
                "daughter distribution needs y > 0, got {y}"
            )));
        }
        if x > y {
            return Ok(0.0);
        }
        if !(x >= 0.0) {
            return Err(Error::precondition(format!(
                "daughter distribution needs x >= 0, got {x}"
            )));
        }
        let v = match self {
            DaughterDistribution::Powerlaw { nu, scale } => {
                if *nu == 0.0 {
                    2.0 * scale / y
                } else {
                    scale * (nu + 2.0) * x.powf(*nu) / y.powf(nu + 1.0)
                }
            }
            DaughterDistribution::Table(t) => t.eval(x, y),
        };
        finite(v, "daughter distribution")
    }

    /// `n_m(y)`: closed form for the power law, adaptive quadrature for tables.
    pub fn partial_moment(&self, y: f64, m: f64) -> Result<f64> {
        if !(y > 0.0) || !(m >= 0.0) {
            return Err(Error::precondition(format!(
                "partial moment needs y > 0 and m >= 0, got y={y}, m={m}"
            )));
        }
        match self {
            DaughterDistribution::Powerlaw { nu, scale } => {
                let p = m + nu + 1.0;
                if p <= 0.0 {
                    return Err(Error::Divergent(format!(
                        "n_{m}(y) diverges at x = 0 for nu = {nu}"
                    )));
                }
                Ok(scale * (nu + 2.0) / p * y.powf(m))
            }
            DaughterDistribution::Table(t) => self.integrate_table(t, 0.0, y, y, |x| x.powf(m)),
        }
    }

    /// `N_m(y) = y^m - n_m(y)`.
    pub fn moment_deficit(&self, y: f64, m: f64) -> Result<f64> {
        match self {
            // y^m ((m - 1) + (1 - scale)(nu + 2)) / (m + nu + 1), exact in sign
            DaughterDistribution::Powerlaw { nu, scale } => {
                // validates the arguments and the divergence at x = 0
                self.partial_moment(y, m)?;
                let excess = (m - 1.0) + (1.0 - scale) * (nu + 2.0);
                Ok(y.powf(m) * excess / (m + nu + 1.0))
            }
            DaughterDistribution::Table(_) => Ok(y.powf(m) - self.partial_moment(y, m)?),
        }
    }

    /// Number of fragments with mass in `[lo, min(hi, y)]`: `∫ b(x, y) dx`.
    pub fn cell_integral(&self, lo: f64, hi: f64, y: f64) -> Result<f64> {
        let hi = hi.min(y);
        if hi <= lo {
            return Ok(0.0);
        }
        match self {
            DaughterDistribution::Powerlaw { nu, scale } => {
                let v = if *nu == 0.0 {
                    2.0 * scale * (hi - lo) / y
                } else if *nu == -1.0 {
                    if lo == 0.0 {
                        return Err(Error::Divergent(
                            "fragment count diverges at x = 0 for nu = -1".into(),
                        ));
                    }
                    scale * (hi / lo).ln()
                } else {
                    let p = nu + 1.0;
                    if p < 0.0 && lo == 0.0 {
                        return Err(Error::Divergent(format!(
                            "fragment count diverges at x = 0 for nu = {nu}"
                        )));
                    }
                    scale * (nu + 2.0) / p * (hi.powf(p) - lo.powf(p)) / y.powf(p)
                };
                finite(v, "fragment count")
            }
            DaughterDistribution::Table(t) => self.integrate_table(t, lo, hi, y, |_| 1.0),
        }
    }

    /// `∫_lo^{min(hi, y)} x b(x, y) dx`, finite for every admissible `nu`.
    pub fn cell_mass(&self, lo: f64, hi: f64, y: f64) -> Result<f64> {
        let hi = hi.min(y);
        if hi <= lo {
            return Ok(0.0);
        }
        match self {
            DaughterDistribution::Powerlaw { nu, scale } => {
                let p = nu + 2.0;
                finite(
                    scale * (hi.powf(p) - lo.powf(p)) / y.powf(nu + 1.0),
                    "fragment mass",
                )
            }
            DaughterDistribution::Table(t) => self.integrate_table(t, lo, hi, y, |x| x),
        }
    }

    /// `∫_lo^hi b(x, y) w(x) dx`, split at the table's x nodes.
    fn integrate_table(
        &self,
        t: &Table2d,
        lo: f64,
        hi: f64,
        y: f64,
        w: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let mut breaks = vec![lo];
        breaks.extend(t.x.iter().copied().filter(|&x| x > lo && x < hi));
        breaks.push(hi);
        let mut total = 0.0;
        for seg in breaks.windows(2) {
            total += quadrature::integrate(
                |x| t.eval(x, y) * w(x),
                seg[0],
                seg[1],
                Tolerance::default(),
            )?
            .value;
        }
        Ok(total)
    }

    pub fn resolve_tables(&mut self, base: &Path) -> Result<()> {
        if let DaughterDistribution::Table(t) = self {
            t.resolve(base)?;
        }
        self.validate()
    }
}

/// Symmetric coagulation kernel `k(x, y) >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoagulationKernel {
    /// `K`
    Constant {
        scale: f64,
    },
    /// `K (x + y)`
    Sum {
        scale: f64,
    },
    /// `K x y`
    Product {
        scale: f64,
    },
    /// `K (1 + a(x))^alpha (1 + a(y))^alpha`
    Dominated {
        scale: f64,
        alpha: f64,
    },
    /// `K ((1 + a(x))^alpha + (1 + a(y))^alpha)`
    DominatedSum {
        scale: f64,
        alpha: f64,
    },
    Table(Table2d),
}

impl CoagulationKernel {
    pub fn constant(scale: f64) -> Self {
        CoagulationKernel::Constant { scale }
    }

    pub fn zero() -> Self {
        CoagulationKernel::Constant { scale: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let check_scale = |s: f64| {
            if s >= 0.0 && s.is_finite() {
                Ok(())
            } else {
                Err(Error::MalformedKernel(format!(
                    "kernel scale must be >= 0, got {s}"
                )))
            }
        };
        let check_alpha = |a: f64| {
            if a > 0.0 && a < 1.0 {
                Ok(())
            } else {
                Err(Error::MalformedKernel(format!(
                    "kernel exponent must lie in (0, 1), got {a}"
                )))
            }
        };
        match self {
            CoagulationKernel::Constant { scale }
            | CoagulationKernel::Sum { scale }
            | CoagulationKernel::Product { scale } => check_scale(*scale),
            CoagulationKernel::Dominated { scale, alpha }
            | CoagulationKernel::DominatedSum { scale, alpha } => {
                check_scale(*scale)?;
                check_alpha(*alpha)
            }
            CoagulationKernel::Table(t) => {
                t.validate()?;
                if t.values.iter().any(|&v| v < 0.0) {
                    return Err(Error::MalformedKernel(
                        "tabulated kernel has negative values".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoagulationKernel::Constant { scale }
            | CoagulationKernel::Sum { scale }
            | CoagulationKernel::Product { scale }
            | CoagulationKernel::Dominated { scale, .. }
            | CoagulationKernel::DominatedSum { scale, .. } => *scale == 0.0,
            CoagulationKernel::Table(t) => t.values.iter().all(|&v| v == 0.0),
        }
    }

    pub fn is_heuristic(&self) -> bool {
        matches!(self, CoagulationKernel::Table(_))
    }

    /// `k(x, y)`; the dominated families read `a` from `rate`.
    pub fn eval(&self, x: f64, y: f64, rate: &FragmentationRate) -> Result<f64> {
        if !(x >= 0.0 && y >= 0.0) {
            return Err(Error::precondition(format!(
                "kernel needs x, y >= 0, got ({x}, {y})"
            )));
        }
        let v = match self {
            CoagulationKernel::Constant { scale } => *scale,
            CoagulationKernel::Sum { scale } => scale * (x + y),
            CoagulationKernel::Product { scale } => scale * x * y,
            CoagulationKernel::Dominated { scale, alpha } => {
                let ax = (1.0 + rate.eval(x)?).powf(*alpha);
                let ay = (1.0 + rate.eval(y)?).powf(*alpha);
                scale * (ax * ay)
            }
            CoagulationKernel::DominatedSum { scale, alpha } => {
                let ax = (1.0 + rate.eval(x)?).powf(*alpha);
                let ay = (1.0 + rate.eval(y)?).powf(*alpha);
                scale * (ax + ay)
            }
            CoagulationKernel::Table(t) => t.eval(x, y),
        };
        finite(v, "coagulation kernel")
    }

    pub fn resolve_tables(&mut self, base: &Path) -> Result<()> {
        if let CoagulationKernel::Table(t) = self {
            t.resolve(base)?;
        }
        self.validate()
    }
}

/// Initial number density `f^in(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `amplitude * exp(-rate * x)`
    Exponential {
        amplitude: f64,
        rate: f64,
    },
    /// `value` on `[lo, hi]`, zero elsewhere.
    Indicator {
        lo: f64,
        hi: f64,
        value: f64,
    },
    Table(Table1d),
}

impl InitialCondition {
    pub fn exponential() -> Self {
        InitialCondition::Exponential {
            amplitude: 1.0,
            rate: 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialCondition::Exponential { amplitude, rate } => amplitude * (-rate * x).exp(),
            InitialCondition::Indicator { lo, hi, value } => {
                if (*lo..=*hi).contains(&x) {
                    *value
                } else {
                    0.0
                }
            }
            InitialCondition::Table(t) => t.eval(x),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialCondition::Exponential { amplitude, rate } => {
                if !(*amplitude >= 0.0 && *rate > 0.0) {
                    return Err(Error::Config(format!(
                        "exponential initial data needs amplitude >= 0 and rate > 0, got {amplitude}, {rate}"
                    )));
                }
            }
            InitialCondition::Indicator { lo, hi, value } => {
                if !(*lo >= 0.0 && hi > lo && *value >= 0.0) {
                    return Err(Error::Config(
                        "indicator needs 0 <= lo < hi and value >= 0".into(),
                    ));
                }
            }
            InitialCondition::Table(t) => {
                t.validate()?;
                if t.values.iter().any(|&v| v < 0.0) {
                    return Err(Error::Config("initial table has negative values".into()));
                }
            }
        }
        Ok(())
    }

    /// Points where the density is discontinuous, used to split quadrature.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            InitialCondition::Indicator { lo, hi, .. } => vec![*lo, *hi],
            InitialCondition::Table(t) => t.x.clone(),
            InitialCondition::Exponential { .. } => Vec::new(),
        }
    }
}

/// A complete problem: the kernel triple, initial data, weight order `m`
/// and the optional shift `omega` of the interpolation norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub fragmentation: FragmentationRate,
    pub daughter: DaughterDistribution,
    pub coagulation: CoagulationKernel,
    #[serde(default = "InitialCondition::exponential")]
    pub initial: InitialCondition,
    /// Weight order of `w_m(x) = 1 + x^m`.
    pub m: f64,
    /// Shift of `(omega + a)^alpha`; chosen from the operator when absent.
    #[serde(default)]
    pub omega: Option<f64>,
    /// Declared growth exponent of the daughter count, `n_0(y) <= b0 (1 + y^l)`.
    #[serde(default)]
    pub l: Option<f64>,
}

impl ProblemSpec {
    pub fn new(
        fragmentation: FragmentationRate,
        daughter: DaughterDistribution,
        coagulation: CoagulationKernel,
        m: f64,
    ) -> Self {
        ProblemSpec {
            fragmentation,
            daughter,
            coagulation,
            initial: InitialCondition::exponential(),
            m,
            omega: None,
            l: None,
        }
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    pub fn declared_l(&self) -> f64 {
        self.l.unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.fragmentation.validate()?;
        self.daughter.validate()?;
        self.coagulation.validate()?;
        self.initial.validate()?;
        let l = self.declared_l();
        if !(l >= 0.0) {
            return Err(Error::precondition(format!("l must be >= 0, got {l}")));
        }
        if !(self.m > 1.0 && self.m > l) {
            return Err(Error::precondition(format!(
                "weight order must satisfy m > max(1, l), got m={}, l={l}",
                self.m
            )));
        }
        if let Some(omega) = self.omega {
            if !(omega > 1.0) {
                return Err(Error::precondition(format!(
                    "omega must exceed 1, got {omega}"
                )));
            }
        }
        Ok(())
    }

    pub fn eval_a(&self, x: f64) -> Result<f64> {
        self.fragmentation.eval(x)
    }

    pub fn eval_b(&self, x: f64, y: f64) -> Result<f64> {
        self.daughter.eval(x, y)
    }

    pub fn eval_k(&self, x: f64, y: f64) -> Result<f64> {
        self.coagulation.eval(x, y, &self.fragmentation)
    }

    pub fn is_heuristic(&self) -> bool {
        self.fragmentation.is_heuristic()
            || self.daughter.is_heuristic()
            || self.coagulation.is_heuristic()
    }

    /// Loads any CSV tables named relative to `base` and validates the result.
    pub fn resolve_tables(&mut self, base: &Path) -> Result<()> {
        self.fragmentation.resolve_tables(base)?;
        self.daughter.resolve_tables(base)?;
        self.coagulation.resolve_tables(base)?;
        if let InitialCondition::Table(t) = &mut self.initial {
            t.resolve(base)?;
        }
        self.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_default;

    #[test]
    fn eval_a_examples() {
        assert_eq!(FragmentationRate::power(1.0, 1.0).eval(2.0).unwrap(), 2.0);
        assert_eq!(FragmentationRate::power(1.0, 0.0).eval(7.3).unwrap(), 1.0);
        let t = FragmentationRate::Table(
            Table1d::new(vec![1.0, 2.0, 4.0], vec![0.5, 3.0, 1.0]).unwrap(),
        );
        assert_eq!(t.eval(2.0).unwrap(), 3.0);
        assert!(t.is_heuristic());
    }

    #[test]
    fn eval_a_non_finite_is_malformed() {
        let a = FragmentationRate::power(1.0, -1.0);
        assert!(matches!(a.eval(0.0), Err(Error::MalformedKernel(_))));
    }

    #[test]
    fn eval_b_examples() {
        let b = DaughterDistribution::uniform();
        assert_eq!(b.eval(1.0, 4.0).unwrap(), 0.5);
        assert_eq!(b.eval(5.0, 4.0).unwrap(), 0.0);
        let b = DaughterDistribution::powerlaw(-1.0);
        assert!((b.eval(0.5, 2.0).unwrap() - 2.0).abs() < 1e-15);
        // mass conservation of the nu = -1 law by quadrature
        let mass = integrate_default(|x| x * b.eval(x, 2.0).unwrap(), 0.0, 2.0).unwrap();
        assert!((mass - 2.0).abs() < 1e-10);
    }

    #[test]
    fn eval_k_examples() {
        let a = FragmentationRate::power(1.0, 1.0);
        assert_eq!(
            CoagulationKernel::constant(1.0).eval(3.0, 9.0, &a).unwrap(),
            1.0
        );
        let k = CoagulationKernel::Dominated {
            scale: 1.0,
            alpha: 0.5,
        };
        assert!((k.eval(3.0, 8.0, &a).unwrap() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn partial_moment_closed_forms() {
        let b = DaughterDistribution::uniform();
        assert!((b.partial_moment(5.0, 1.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((b.partial_moment(5.0, 0.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((b.partial_moment(3.0, 2.0).unwrap() - 6.0).abs() < 1e-14);
        assert!((b.moment_deficit(2.0, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!((b.moment_deficit(1.0, 0.5).unwrap() + 1.0 / 3.0).abs() < 1e-14);
        for nu in [-0.9, -0.37, -0.1, 0.0] {
            assert_eq!(
                DaughterDistribution::powerlaw(nu)
                    .moment_deficit(123.4, 1.0)
                    .unwrap(),
                0.0
            );
        }
        let scaled = DaughterDistribution::Powerlaw {
            nu: 0.0,
            scale: 1.5,
        };
        assert!((scaled.moment_deficit(2.0, 1.0).unwrap() - (2.0 - 3.0)).abs() < 1e-14);
        assert!(matches!(
            DaughterDistribution::powerlaw(-1.0).partial_moment(2.0, 0.0),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn closed_form_matches_quadrature_oracle() {
        for &nu in &[0.0, -0.5, -1.0, -1.5] {
            let b = DaughterDistribution::powerlaw(nu);
            for &y in &[0.3, 2.0, 17.0] {
                for &m in &[1.0, 1.5, 2.0, 3.0] {
                    let oracle =
                        integrate_default(|x| b.eval(x, y).unwrap() * x.powf(m), 0.0, y).unwrap();
                    let closed = b.partial_moment(y, m).unwrap();
                    assert!(
                        (oracle - closed).abs() <= 1e-8 * closed.abs().max(1.0),
                        "nu={nu} y={y} m={m}: {oracle} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn cell_integrals_partition_the_count() {
        let b = DaughterDistribution::powerlaw(-0.5);
        let y = 3.0;
        let edges = [0.0, 0.1, 0.7, 1.9, 3.0, 4.0];
        let total: f64 = edges
            .windows(2)
            .map(|e| b.cell_integral(e[0], e[1], y).unwrap())
            .sum();
        assert!((total - b.partial_moment(y, 0.0).unwrap()).abs() < 1e-13);
        assert!(DaughterDistribution::powerlaw(-1.0)
            .cell_integral(0.0, 1.0, 2.0)
            .is_err());
        let mass: f64 = edges
            .windows(2)
            .map(|e| b.cell_mass(e[0], e[1], y).unwrap())
            .sum();
        assert!((mass - y).abs() < 1e-13);
    }

    #[test]
    fn table_daughter_uses_quadrature() {
        let ys = vec![0.5, 1.0, 2.0, 4.0];
        let xs = vec![0.01, 0.5, 1.0, 2.0, 4.0];
        let mut values = Vec::new();
        for _x in &xs {
            for &y in &ys {
                values.push(2.0 / y);
            }
        }
        let b = DaughterDistribution::Table(Table2d::new(xs, ys, values).unwrap());
        let n1 = b.partial_moment(2.0, 1.0).unwrap();
        assert!((n1 - 2.0).abs() < 1e-8, "{n1}");
        assert_eq!(b.eval(3.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn spec_validation() {
        let mut s = ProblemSpec::new(
            FragmentationRate::power(1.0, 1.0),
            DaughterDistribution::uniform(),
            CoagulationKernel::constant(1.0),
            2.0,
        );
        assert!(s.validate().is_ok());
        s.m = 1.0;
        assert!(s.validate().is_err());
        s.m = 2.0;
        s.l = Some(2.5);
        assert!(s.validate().is_err());
        s.l = None;
        s.omega = Some(1.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn config_shape() {
        let json = r#"{
            "fragmentation": {"family": "power", "a0": 1.0, "gamma": 1.0},
            "daughter": {"family": "powerlaw", "nu": 0.0},
            "coagulation": {"family": "dominated", "scale": 1.0, "alpha": 0.5},
            "m": 2.0
        }"#;
        let s: ProblemSpec = serde_json::from_str(json).unwrap();
        assert_eq!(s.daughter, DaughterDistribution::uniform());
        assert_eq!(s.initial, InitialCondition::exponential());
    }
}
