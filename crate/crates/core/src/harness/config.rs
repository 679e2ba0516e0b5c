use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::admissibility::ProbeSettings;
use crate::diagnostics::MonitorConfig;
use crate::discretization::{MassGrid, Spacing};
use crate::error::{Error, Result};
use crate::kernels::{CoagulationKernel, DaughterDistribution, FragmentationRate, ProblemSpec};
use crate::solver::IntegratorControls;

/// The example configuration shipped with the crate.
pub const BUNDLED_CONFIG: &str = include_str!("../../configs/bundled.json");

/// Monitors `simulate` knows about.
pub const MONITOR_NAMES: [&str; 6] = [
    "dissipation",
    "holder",
    "coag-moment",
    "bilinear",
    "one-sided",
    "ledger",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub radius: f64,
    pub cells: usize,
    pub spacing: Spacing,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            radius: 64.0,
            cells: 512,
            spacing: Spacing::default(),
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<MassGrid> {
        MassGrid::build(self.radius, self.cells, self.spacing)
    }
}

/// Truncation and validation study settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Compared radii, strictly increasing.
    pub radii: Vec<f64>,
    /// Radius of the surrogate for the untruncated solution.
    pub reference_radius: f64,
    pub t_final: f64,
    /// Norm order and interpolation exponent of the error measurement.
    pub m: f64,
    pub alpha: f64,
    /// Fixed step shared by every radius, so time errors cancel in `e_r`.
    pub dt: f64,
    /// Geometric ratio of the nested grids; fixes the cell width at each mass.
    pub ratio: f64,
    /// First interior edge of the nested grids.
    pub min_edge: f64,
    /// Tool threshold on consecutive error ratios.
    pub ratio_threshold: f64,
    pub validation_cells: Vec<usize>,
    pub validation_radius: f64,
    pub validation_times: Vec<f64>,
    /// Step of the pure-coagulation runs (extrapolated with `dt/2`).
    pub validation_dt: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            radii: vec![16.0, 32.0, 64.0],
            reference_radius: 128.0,
            t_final: 1.0,
            m: 2.0,
            alpha: 0.5,
            dt: 0.01,
            ratio: 2f64.powf(1.0 / 32.0),
            min_edge: 6.4e-4,
            ratio_threshold: 2.0,
            validation_cells: vec![128, 256, 512],
            validation_radius: 64.0,
            validation_times: vec![0.5, 1.0, 2.0],
            validation_dt: 2e-3,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!(
                "study radii must be strictly increasing, got {:?}",
                self.radii
            )));
        }
        if self.radii.len() < 3 {
            return Err(Error::Config(format!(
                "study needs at least 3 radii, got {}",
                self.radii.len()
            )));
        }
        if self.radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Config("study radii must be positive".into()));
        }
        if !(self.reference_radius > *self.radii.last().expect("nonempty")) {
            return Err(Error::Config(
                "reference_radius must exceed every study radius".into(),
            ));
        }
        if !(self.t_final > 0.0 && self.dt > 0.0 && self.dt <= self.t_final) {
            return Err(Error::Config("study needs 0 < dt <= t_final".into()));
        }
        if !(self.m > 1.0 && self.alpha >= 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(
                "study needs m > 1 and alpha in [0, 1]".into(),
            ));
        }
        if !(self.ratio > 1.0 && self.min_edge > 0.0 && self.min_edge < self.radii[0]) {
            return Err(Error::Config(
                "study grid needs ratio > 1 and 0 < min_edge < smallest radius".into(),
            ));
        }
        if !(self.ratio_threshold >= 1.0) {
            return Err(Error::Config("ratio_threshold must be >= 1".into()));
        }
        if self.validation_cells.len() < 2 || self.validation_cells.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Config(
                "validation_cells needs at least 2 increasing sizes".into(),
            ));
        }
        if self.validation_times.is_empty() || self.validation_times.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Config("validation_times must be positive".into()));
        }
        if !(self.validation_radius > 0.0 && self.validation_dt > 0.0) {
            return Err(Error::Config(
                "validation radius and step must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Nested geometric grid reaching `radius`, sharing edges with every
    /// other grid of this study.
    pub fn reference_grid(&self) -> Result<MassGrid> {
        let n =
            ((self.reference_radius / self.min_edge).ln() / self.ratio.ln()).round() as usize + 1;
        MassGrid::build(
            self.reference_radius,
            n,
            Spacing::Geometric {
                ratio: Some(self.ratio),
            },
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Also write the assembled operators as matrix-market text.
    pub dump_operators: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub controls: IntegratorControls,
    #[serde(default)]
    pub monitors: Vec<String>,
    #[serde(default)]
    pub monitor_settings: MonitorConfig,
    #[serde(default)]
    pub study: StudyConfig,
    #[serde(default)]
    pub probe: ProbeSettings,
    /// Checks that decide the admissibility verdict; all but sum domination
    /// when absent.
    #[serde(default)]
    pub hypotheses: Option<Vec<String>>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    /// Parses JSON text; syntax and schema errors carry line and column.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        Ok(cfg)
    }

    /// Reads, parses, resolves table paths relative to the file and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.problem.resolve_tables(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bundled() -> Self {
        let cfg = Self::parse(BUNDLED_CONFIG, "bundled.json").expect("bundled config parses");
        cfg.validate().expect("bundled config is valid");
        cfg
    }

    /// `a(x) = x`, `b = 2/y`, `k = 1`, `f^in = e^{-x}`, `m = 2` on `(0, 64]`.
    pub fn full_model() -> Self {
        let mut cfg = Self::bundled();
        cfg.problem = ProblemSpec::new(
            FragmentationRate::power(1.0, 1.0),
            DaughterDistribution::uniform(),
            CoagulationKernel::constant(1.0),
            2.0,
        );
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.grid.build()?;
        self.controls.validate()?;
        self.monitor_settings.validate()?;
        self.study.validate()?;
        self.probe.validate()?;
        for name in &self.monitors {
            if !MONITOR_NAMES.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown monitor `{name}`, expected one of {MONITOR_NAMES:?}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_parses() {
        let cfg = RunConfig::bundled();
        assert_eq!(cfg.problem.m, 2.0);
        assert_eq!(cfg.study.radii, vec![16.0, 32.0, 64.0]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = RunConfig::parse("{\n  \"problem\": {,\n}", "bad.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("bad.json:2:"), "{err}");
        let err = RunConfig::parse(&BUNDLED_CONFIG.replace("\"seed\"", "\"sead\""), "x.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown field `sead`"), "{err}");
    }

    #[test]
    fn repeated_radius_is_rejected() {
        let mut cfg = RunConfig::bundled();
        cfg.study.radii = vec![16.0, 16.0];
        assert!(
            matches!(cfg.validate(), Err(Error::Config(m)) if m.contains("strictly increasing"))
        );
    }

    #[test]
    fn unknown_monitor_is_rejected() {
        let mut cfg = RunConfig::bundled();
        cfg.monitors.push("nope".into());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn nested_reference_grid_contains_study_radii() {
        let cfg = StudyConfig::default();
        let g = cfg.reference_grid().unwrap();
        for &r in &cfg.radii {
            let n = g.cells_within(r);
            assert!(
                (g.edges()[n] - r).abs() < 1e-9 * r,
                "{} vs {r}",
                g.edges()[n]
            );
        }
        assert!((g.edges()[1] - cfg.min_edge).abs() < 0.02 * cfg.min_edge);
    }
}
