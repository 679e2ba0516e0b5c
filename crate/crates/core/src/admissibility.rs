//! Sampled audits of a kernel triple against the hypotheses of the
//! generation and solvability theorems.
//!
//! Every check works on a finite probe range, so a pass is a finite-range
//! certificate, never a proof. Individual check failures are recorded in the
//! report; only violated preconditions are errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{CoagulationKernel, DaughterDistribution, FragmentationRate, ProblemSpec};

/// Relative slack allowed when re-checking an emitted constant on samples.
pub const VERIFY_SLACK: f64 = 1e-12;

/// Label attached to every liminf estimate.
pub const CERTIFICATE: &str = "finite-range certificate";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSettings {
    /// Smallest and largest parent mass of the logarithmic probe set.
    pub y_min: f64,
    pub y_max: f64,
    pub probes: usize,
    /// Points used to re-verify emitted constants.
    pub dense_samples: usize,
    /// Pass threshold for `inf N_m(y) / y^m` over `y >= 1`.
    pub liminf_floor: f64,
    /// Pairs for the domination fit cover `(0, coag_radius]²`.
    pub coag_radius: f64,
    pub coag_samples: usize,
    pub alpha_step: f64,
    pub l_step: f64,
    pub l_max: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            y_min: 1e-3,
            y_max: 1e6,
            probes: 241,
            dense_samples: 10_000,
            liminf_floor: 1e-3,
            coag_radius: 1e3,
            coag_samples: 48,
            alpha_step: 0.05,
            l_step: 0.25,
            l_max: 8.0,
        }
    }
}

impl ProbeSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.y_min > 0.0 && self.y_max >= 1e3 * self.y_min && self.y_max >= 1e3) {
            return Err(Error::Config(format!(
                "probe range must span at least three decades and reach 1e3, got [{}, {}]",
                self.y_min, self.y_max
            )));
        }
        if self.probes < 8 || self.dense_samples < 2 || self.coag_samples < 4 {
            return Err(Error::Config("too few probe samples".into()));
        }
        if !(self.liminf_floor > 0.0) {
            return Err(Error::Config("liminf_floor must be positive".into()));
        }
        if !(self.coag_radius > 0.0) {
            return Err(Error::Config("coag_radius must be positive".into()));
        }
        if !(self.alpha_step > 0.0
            && self.alpha_step < 1.0
            && self.l_step > 0.0
            && self.l_max >= 0.0)
        {
            return Err(Error::Config(
                "grid steps must be positive, alpha_step < 1".into(),
            ));
        }
        Ok(())
    }

    /// Logarithmic probe set on `[y_min, y_max]`, always containing 1.
    pub fn probe_masses(&self) -> Vec<f64> {
        let mut ys = log_space(self.y_min, self.y_max, self.probes);
        if !ys.contains(&1.0) && self.y_min < 1.0 {
            ys.push(1.0);
            ys.sort_by(f64::total_cmp);
        }
        ys
    }
}

/// `NaN` marks a constant that could not be determined; it travels as JSON `null`.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub y: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    pub max_residual: f64,
    pub worst_y: f64,
    pub failures: Vec<SampleFailure>,
    pub passed: bool,
}

/// `max |n_1(y)/y - 1|` over the samples; passes at `1e-6`.
pub fn check_mass_conservation(b: &DaughterDistribution, y_samples: &[f64]) -> Result<MassCheck> {
    if y_samples.is_empty() || y_samples.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::precondition(
            "mass-conservation samples must be positive and nonempty",
        ));
    }
    let mut max_residual = 0.0;
    let mut worst_y = y_samples[0];
    let mut failures = Vec::new();
    for &y in y_samples {
        match b.partial_moment(y, 1.0) {
            Ok(n1) => {
                let r = (n1 / y - 1.0).abs();
                if r > max_residual {
                    max_residual = r;
                    worst_y = y;
                }
            }
            Err(e) => failures.push(SampleFailure {
                y,
                message: e.to_string(),
            }),
        }
    }
    Ok(MassCheck {
        max_residual,
        worst_y,
        passed: failures.is_empty() && max_residual <= 1e-6,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    #[serde(with = "nullable")]
    pub b0: f64,
    #[serde(with = "nullable")]
    pub l: f64,
    /// Whether `l` was declared rather than fitted.
    pub forced: bool,
    pub passed: bool,
    pub message: Option<String>,
}

impl GrowthFit {
    fn failed(message: String) -> Self {
        GrowthFit {
            b0: f64::NAN,
            l: f64::NAN,
            forced: false,
            passed: false,
            message: Some(message),
        }
    }
}

/// True when the sup of `ratio` over the top decade of `ys` does not exceed
/// its sup over the rest, i.e. the ratio stopped growing inside the range.
fn bounded_at_top(ys: &[f64], ratio: &[f64]) -> bool {
    let cut = ys[ys.len() - 1] / 10.0;
    let (mut inner, mut outer) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (&y, &r) in ys.iter().zip(ratio) {
        if y > cut {
            outer = outer.max(r);
        } else {
            inner = inner.max(r);
        }
    }
    outer <= inner * (1.0 + 1e-9)
}

/// Fits `n_0(y) <= b0 (1 + y^l)`: the smallest `l` on the grid
/// `{0, l_step, ..., l_max}` for which the ratio `n_0 / (1 + y^l)` stops
/// growing within the samples, and `b0` as its maximum. With `forced_l` only
/// `b0` is fitted.
pub fn estimate_n0_growth(
    b: &DaughterDistribution,
    y_samples: &[f64],
    forced_l: Option<f64>,
    settings: &ProbeSettings,
) -> Result<GrowthFit> {
    if y_samples.len() < 2 || y_samples.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::precondition("growth fit needs positive samples"));
    }
    let (lo, hi) = y_samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    if hi < 1e3 * lo {
        return Err(Error::precondition(
            "growth fit needs samples spanning three decades",
        ));
    }
    let mut n0 = Vec::with_capacity(y_samples.len());
    for &y in y_samples {
        match b.partial_moment(y, 0.0) {
            Ok(v) if v.is_finite() => n0.push(v),
            Ok(v) => return Ok(GrowthFit::failed(format!("n_0({y}) = {v}"))),
            Err(e) => return Ok(GrowthFit::failed(format!("n_0({y}): {e}"))),
        }
    }
    let fit = |l: f64| -> (f64, Vec<f64>) {
        let ratio: Vec<f64> = y_samples
            .iter()
            .zip(&n0)
            .map(|(&y, &n)| n / (1.0 + y.powf(l)))
            .collect();
        (ratio.iter().cloned().fold(0.0, f64::max), ratio)
    };
    if let Some(l) = forced_l {
        let (b0, _) = fit(l);
        return Ok(GrowthFit {
            b0,
            l,
            forced: true,
            passed: true,
            message: None,
        });
    }
    let steps = (settings.l_max / settings.l_step).round() as usize;
    for k in 0..=steps {
        let l = k as f64 * settings.l_step;
        let (b0, ratio) = fit(l);
        if bounded_at_top(y_samples, &ratio) {
            return Ok(GrowthFit {
                b0,
                l,
                forced: false,
                passed: true,
                message: None,
            });
        }
    }
    Ok(GrowthFit::failed(format!(
        "n_0 grows faster than y^{} on the probe range",
        settings.l_max
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodcharEstimate {
    pub m0: f64,
    /// `inf N_{m0}(y) / y^{m0}` over probes `y >= 1`.
    pub inf_ratio: f64,
    pub worst_y: f64,
    /// `inf_ratio` when the check passes, zero otherwise.
    pub delta: f64,
    pub floor: f64,
    pub passed: bool,
    pub certificate: String,
}

impl GoodcharEstimate {
    /// Lower bound `δ_{m0} (m - 1)/(m0 - 1)` on `δ_m` for `1 < m <= m0`.
    pub fn implied_lower_bound(&self, m: f64) -> Option<f64> {
        (m > 1.0 && m <= self.m0 && self.passed).then(|| self.delta * (m - 1.0) / (self.m0 - 1.0))
    }
}

pub fn check_goodchar(
    b: &DaughterDistribution,
    m0: f64,
    y_probe: &[f64],
    floor: f64,
) -> Result<GoodcharEstimate> {
    if !(m0 > 1.0) {
        return Err(Error::precondition(format!(
            "the liminf condition needs order > 1 (N_1 vanishes identically), got {m0}"
        )));
    }
    if y_probe.windows(2).any(|w| !(w[1] > w[0])) || y_probe.last().is_none_or(|&y| y < 1e3) {
        return Err(Error::precondition(
            "probe masses must increase and reach 1e3",
        ));
    }
    let mut inf_ratio = f64::INFINITY;
    let mut worst_y = 1.0;
    for &y in y_probe.iter().filter(|&&y| y >= 1.0) {
        let r = b.moment_deficit(y, m0)? / y.powf(m0);
        if r < inf_ratio {
            inf_ratio = r;
            worst_y = y;
        }
    }
    let passed = inf_ratio >= floor;
    Ok(GoodcharEstimate {
        m0,
        inf_ratio,
        worst_y,
        delta: if passed { inf_ratio } else { 0.0 },
        floor,
        passed,
        certificate: CERTIFICATE.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiyaderaConstants {
    pub m: f64,
    #[serde(with = "nullable")]
    pub cprime: f64,
    #[serde(with = "nullable")]
    pub r: f64,
    #[serde(with = "nullable")]
    pub zeta: f64,
    #[serde(with = "nullable")]
    pub gamma: f64,
    pub samples: usize,
    /// Dense-sample violations of the two inequalities above `r` and the
    /// shift inequality below `r`.
    pub violations: usize,
    pub passed: bool,
    pub message: Option<String>,
}

impl MiyaderaConstants {
    fn failed(m: f64, message: String) -> Self {
        MiyaderaConstants {
            m,
            cprime: f64::NAN,
            r: f64::NAN,
            zeta: f64::NAN,
            gamma: f64::NAN,
            samples: 0,
            violations: 0,
            passed: false,
            message: Some(message),
        }
    }
}

/// `c' = sup_{y >= 1} n_m(y)/y^m`, the threshold `r` past which
/// `b0 (1 + x^l)/(1 + x^m) <= (1 - c')/4`, the shift `ζ` with
/// `sup_{[0, r]} a b0 (1 + x^l)/(a + ζ) <= (1 - c')/4`, and `γ = (c' + 1)/2`.
pub fn miyadera_constants(
    a: &FragmentationRate,
    b: &DaughterDistribution,
    m: f64,
    b0: f64,
    l: f64,
    settings: &ProbeSettings,
) -> Result<MiyaderaConstants> {
    if !(m > 1.0_f64.max(l)) {
        return Err(Error::precondition(format!(
            "need m > max(1, l), got m={m}, l={l}"
        )));
    }
    if !(b0 >= 0.0 && b0.is_finite()) {
        return Err(Error::precondition(format!(
            "b0 must be finite and >= 0, got {b0}"
        )));
    }
    let dense = log_space(1.0, settings.y_max, settings.dense_samples);
    let mut cprime = 0.0f64;
    for &y in &dense {
        cprime = cprime.max(b.partial_moment(y, m)? / y.powf(m));
    }
    if !(cprime < 1.0) {
        return Ok(MiyaderaConstants::failed(
            m,
            format!("n_m(x)/x^m <= c' < 1 fails: c' = {cprime}"),
        ));
    }
    let q = (1.0 - cprime) / 4.0;
    let excess = |x: f64| b0 * (1.0 + x.powf(l)) - q * (1.0 + x.powf(m));

    // last probe where the growth inequality fails, then bisect to the crossing
    let scan = log_space(settings.y_min, settings.y_max, settings.dense_samples);
    let Some(last_bad) = scan.iter().rposition(|&x| excess(x) > 0.0) else {
        return Ok(finish(a, b, m, b0, l, cprime, 1.0, settings));
    };
    if last_bad + 1 == scan.len() {
        return Ok(MiyaderaConstants::failed(
            m,
            format!(
                "b0 (1 + x^l)/(1 + x^m) <= (1 - c')/4 never holds up to x = {}",
                settings.y_max
            ),
        ));
    }
    let (mut lo, mut hi) = (scan[last_bad], scan[last_bad + 1]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(finish(a, b, m, b0, l, cprime, hi.max(1.0), settings))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: &FragmentationRate,
    b: &DaughterDistribution,
    m: f64,
    b0: f64,
    l: f64,
    cprime: f64,
    r: f64,
    settings: &ProbeSettings,
) -> MiyaderaConstants {
    let q = (1.0 - cprime) / 4.0;
    let n = settings.dense_samples;
    // ζ >= a (b0 (1 + x^l)/q - 1) on (0, r]; the power families are monotone
    // there, so r itself is included as a sample
    let mut sup = 0.0f64;
    for k in 1..=n {
        let x = r * k as f64 / n as f64;
        match a.eval(x) {
            Ok(ax) => sup = sup.max(ax * (b0 * (1.0 + x.powf(l)) / q - 1.0)),
            Err(e) => return MiyaderaConstants::failed(m, format!("a({x}): {e}")),
        }
    }
    if !sup.is_finite() {
        return MiyaderaConstants::failed(m, "the shift inequality admits no finite ζ".into());
    }
    let zeta = sup.max(1.0) * (1.0 + VERIFY_SLACK);

    // re-check on points disjoint from the fitting samples
    let mut violations = 0;
    let above = log_space(r, settings.y_max, n);
    for &x in &above {
        let c = b
            .partial_moment(x, m)
            .map(|v| v / x.powf(m))
            .unwrap_or(f64::INFINITY);
        if c > cprime * (1.0 + VERIFY_SLACK) {
            violations += 1;
        }
        if b0 * (1.0 + x.powf(l)) / (1.0 + x.powf(m)) > q * (1.0 + VERIFY_SLACK) {
            violations += 1;
        }
    }
    for k in 0..n {
        let x = r * (k as f64 + 0.5) / n as f64;
        let ax = a.eval(x).unwrap_or(f64::INFINITY);
        let v = if ax.is_infinite() {
            b0 * (1.0 + x.powf(l))
        } else {
            ax * b0 * (1.0 + x.powf(l)) / (ax + zeta)
        };
        if v > q * (1.0 + VERIFY_SLACK) {
            violations += 1;
        }
    }
    let gamma = 0.5 * (cprime + 1.0);
    MiyaderaConstants {
        m,
        cprime,
        r,
        zeta,
        gamma,
        samples: n,
        violations,
        passed: violations == 0 && gamma < 1.0,
        message: (violations > 0).then(|| format!("{violations} dense-sample violations")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominationMode {
    /// `k <= K (1 + a(x))^α (1 + a(y))^α`
    PointwiseProduct,
    /// `k <= K ((1 + a(x))^α + (1 + a(y))^α)`
    PointwiseSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationFit {
    pub mode: DominationMode,
    #[serde(rename = "K")]
    #[serde(with = "nullable")]
    pub k: f64,
    #[serde(with = "nullable")]
    pub alpha: f64,
    pub passed: bool,
    pub worst_pair: Option<(f64, f64)>,
}

/// Default domination pairs: a logarithmic grid on `(0, radius]` plus zero,
/// squared.
pub fn domination_pairs(radius: f64, n: usize) -> Vec<(f64, f64)> {
    let mut xs = vec![0.0];
    xs.extend(log_space(radius * 1e-6, radius, n));
    let mut pairs = Vec::with_capacity(xs.len() * xs.len());
    for &x in &xs {
        for &y in &xs {
            pairs.push((x, y));
        }
    }
    pairs
}

/// Smallest `α` on the grid `{step, 2 step, ...} ⊂ (0, 1)` for which the
/// ratio of `k` to the dominating function stops growing within the samples;
/// `K` is the maximum ratio, so the bound holds at every sample.
pub fn check_coag_domination(
    k: &CoagulationKernel,
    a: &FragmentationRate,
    mode: DominationMode,
    pairs: &[(f64, f64)],
    alpha_step: f64,
) -> Result<DominationFit> {
    if pairs.is_empty() {
        return Err(Error::precondition("domination check needs sample pairs"));
    }
    let mut kv = Vec::with_capacity(pairs.len());
    let mut ax = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        kv.push(k.eval(x, y, a)?);
        ax.push((1.0 + a.eval(x)?, 1.0 + a.eval(y)?));
    }
    let top = pairs.iter().fold(0.0f64, |s, &(x, y)| s.max(x).max(y));
    let steps = ((1.0 / alpha_step).ceil() as usize).saturating_sub(1);
    let mut worst = None;
    for s in 1..=steps {
        let alpha = s as f64 * alpha_step;
        if alpha >= 1.0 {
            break;
        }
        let ratio: Vec<f64> = kv
            .iter()
            .zip(&ax)
            .map(|(&k, &(u, v))| {
                let d = match mode {
                    DominationMode::PointwiseProduct => u.powf(alpha) * v.powf(alpha),
                    DominationMode::PointwiseSum => u.powf(alpha) + v.powf(alpha),
                };
                k / d
            })
            .collect();
        let (mut inner, mut outer, mut arg) = (0.0f64, 0.0f64, 0);
        for (idx, (&(x, y), &r)) in pairs.iter().zip(&ratio).enumerate() {
            if x.max(y) > top / 10.0 {
                if r > outer {
                    outer = r;
                    arg = idx;
                }
            } else {
                inner = inner.max(r);
            }
        }
        worst = Some(pairs[arg]);
        if outer <= inner * (1.0 + 1e-9) {
            let kfit = ratio.iter().cloned().fold(0.0, f64::max);
            return Ok(DominationFit {
                mode,
                k: kfit,
                alpha,
                passed: true,
                worst_pair: None,
            });
        }
    }
    Ok(DominationFit {
        mode,
        k: f64::NAN,
        alpha: f64::NAN,
        passed: false,
        worst_pair: worst,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Whether the overall verdict depends on this check.
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub m: f64,
    pub delta: f64,
    pub inf_ratio: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub m: f64,
    pub mass_conservation_pass: bool,
    pub mass_residual: f64,
    #[serde(with = "nullable")]
    pub b0: f64,
    #[serde(with = "nullable")]
    pub l: f64,
    pub delta_m: Vec<DeltaEntry>,
    #[serde(with = "nullable")]
    pub cprime: f64,
    #[serde(with = "nullable")]
    pub r_threshold: f64,
    #[serde(with = "nullable")]
    pub zeta: f64,
    #[serde(with = "nullable")]
    pub gamma: f64,
    #[serde(rename = "K")]
    #[serde(with = "nullable")]
    pub k: f64,
    #[serde(with = "nullable")]
    pub alpha: f64,
    pub miyadera: Option<MiyaderaConstants>,
    pub domination: Vec<DominationFit>,
    pub checks: Vec<CheckOutcome>,
    /// Set when any kernel is tabulated: results hold only on the sampled range.
    pub heuristic: bool,
    pub certificate: String,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.required).all(|c| c.passed)
    }

    pub fn delta_at(&self, m: f64) -> Option<f64> {
        self.delta_m.iter().find(|d| d.m == m).map(|d| d.delta)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width text table of the checks.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<24} {:<6} {:<9} detail\n",
            "hypothesis", "pass", "required"
        );
        for c in &self.checks {
            s.push_str(&format!(
                "{:<24} {:<6} {:<9} {}\n",
                c.name,
                if c.passed { "yes" } else { "NO" },
                if c.required { "yes" } else { "no" },
                c.detail
            ));
        }
        s.push_str(&format!(
            "m={} b0={:.6} l={} c'={:.12} r={:.6} zeta={:.6} gamma={:.12} K={:.6} alpha={}\n",
            self.m,
            self.b0,
            self.l,
            self.cprime,
            self.r_threshold,
            self.zeta,
            self.gamma,
            self.k,
            self.alpha
        ));
        s.push_str(&format!("({})\n", self.certificate));
        s
    }
}

/// Check names, in report order.
pub mod names {
    pub const MASS: &str = "mass-conservation";
    pub const N0_GROWTH: &str = "n0-growth";
    pub const GOODCHAR: &str = "liminf";
    pub const MIYADERA: &str = "miyadera";
    pub const DOMINATION_PRODUCT: &str = "domination-product";
    pub const DOMINATION_SUM: &str = "domination-sum";
}

/// Runs every check for `spec.m`. `required` lists the checks that decide
/// the verdict; `None` means all but the sum-domination check.
pub fn audit(
    spec: &ProblemSpec,
    settings: &ProbeSettings,
    required: Option<&[String]>,
) -> Result<AdmissibilityReport> {
    spec.validate()?;
    settings.validate()?;
    let m = spec.m;
    if !(m > 1.0_f64.max(spec.declared_l())) {
        return Err(Error::precondition(format!(
            "need m > max(1, l), got m={m}, l={}",
            spec.declared_l()
        )));
    }
    let is_required = |name: &str| match required {
        Some(list) => list.iter().any(|r| r == name),
        None => name != names::DOMINATION_SUM,
    };
    let mut checks = Vec::new();
    let probes = settings.probe_masses();

    let mass = check_mass_conservation(&spec.daughter, &probes)?;
    checks.push(CheckOutcome {
        name: names::MASS.into(),
        passed: mass.passed,
        required: is_required(names::MASS),
        detail: if mass.failures.is_empty() {
            format!(
                "max |n_1/y - 1| = {:.3e} at y = {:.4e}",
                mass.max_residual, mass.worst_y
            )
        } else {
            format!(
                "{} samples failed, first: {}",
                mass.failures.len(),
                mass.failures[0].message
            )
        },
    });

    let growth = estimate_n0_growth(&spec.daughter, &probes, spec.l, settings)?;
    checks.push(CheckOutcome {
        name: names::N0_GROWTH.into(),
        passed: growth.passed,
        required: is_required(names::N0_GROWTH),
        detail: match &growth.message {
            Some(msg) => msg.clone(),
            None => format!("n_0(y) <= {:.6} (1 + y^{})", growth.b0, growth.l),
        },
    });
    if growth.passed && !(m > growth.l) {
        return Err(Error::precondition(format!(
            "need m > l, got m={m}, fitted l={}",
            growth.l
        )));
    }

    let mut orders = vec![m, 2.0, 3.0, 4.0];
    orders.sort_by(f64::total_cmp);
    orders.dedup();
    let mut delta_m = Vec::new();
    for &order in &orders {
        let g = check_goodchar(&spec.daughter, order, &probes, settings.liminf_floor)?;
        delta_m.push(DeltaEntry {
            m: order,
            delta: g.delta,
            inf_ratio: g.inf_ratio,
            passed: g.passed,
        });
        if order == m {
            checks.push(CheckOutcome {
                name: names::GOODCHAR.into(),
                passed: g.passed,
                required: is_required(names::GOODCHAR),
                detail: format!(
                    "inf N_m/y^m = {:.6} at y = {:.4e} (floor {})",
                    g.inf_ratio, g.worst_y, g.floor
                ),
            });
        }
    }

    let miyadera = if growth.passed {
        Some(miyadera_constants(
            &spec.fragmentation,
            &spec.daughter,
            m,
            growth.b0,
            growth.l,
            settings,
        )?)
    } else {
        None
    };
    checks.push(CheckOutcome {
        name: names::MIYADERA.into(),
        passed: miyadera.as_ref().is_some_and(|c| c.passed),
        required: is_required(names::MIYADERA),
        detail: match &miyadera {
            None => "skipped: no daughter-count bound".into(),
            Some(c) => c.message.clone().unwrap_or_else(|| {
                format!(
                    "c' = {:.9}, r = {:.6}, zeta = {:.6}, gamma = {:.9}, {} samples clean",
                    c.cprime, c.r, c.zeta, c.gamma, c.samples
                )
            }),
        },
    });

    let pairs = domination_pairs(settings.coag_radius, settings.coag_samples);
    let mut domination = Vec::new();
    for (mode, name) in [
        (DominationMode::PointwiseProduct, names::DOMINATION_PRODUCT),
        (DominationMode::PointwiseSum, names::DOMINATION_SUM),
    ] {
        let fit = check_coag_domination(
            &spec.coagulation,
            &spec.fragmentation,
            mode,
            &pairs,
            settings.alpha_step,
        )?;
        checks.push(CheckOutcome {
            name: name.into(),
            passed: fit.passed,
            required: is_required(name),
            detail: match fit.worst_pair {
                None => format!("K = {:.6}, alpha = {}", fit.k, fit.alpha),
                Some((x, y)) => format!("no alpha < 1 bounds k; worst pair ({x:.4e}, {y:.4e})"),
            },
        });
        domination.push(fit);
    }
    let product = &domination[0];
    let m_consts = miyadera.clone();
    Ok(AdmissibilityReport {
        m,
        mass_conservation_pass: mass.passed,
        mass_residual: mass.max_residual,
        b0: growth.b0,
        l: growth.l,
        delta_m,
        cprime: m_consts.as_ref().map_or(f64::NAN, |c| c.cprime),
        r_threshold: m_consts.as_ref().map_or(f64::NAN, |c| c.r),
        zeta: m_consts.as_ref().map_or(f64::NAN, |c| c.zeta),
        gamma: m_consts.as_ref().map_or(f64::NAN, |c| c.gamma),
        k: product.k,
        alpha: product.alpha,
        miyadera,
        domination,
        checks,
        heuristic: spec.is_heuristic(),
        certificate: CERTIFICATE.into(),
    })
}
