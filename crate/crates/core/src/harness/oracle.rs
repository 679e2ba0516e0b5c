use serde::{Deserialize, Serialize};

use crate::kernels::{
    CoagulationKernel, DaughterDistribution, FragmentationRate, InitialCondition, ProblemSpec,
};

/// Problems with a known closed-form solution from `f^in = e^{-x}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Oracle {
    /// `a(x) = x`, `b = 2/y`, `k = 0`: `f = (1+t)² e^{-x(1+t)}`.
    PureFragmentation,
    /// `a = 0`, `k = 1`: `f = 4 (2+t)^{-2} e^{-2x/(2+t)}`.
    PureCoagulation,
}

impl Oracle {
    pub fn spec(self) -> ProblemSpec {
        match self {
            Oracle::PureFragmentation => ProblemSpec::new(
                FragmentationRate::power(1.0, 1.0),
                DaughterDistribution::uniform(),
                CoagulationKernel::zero(),
                2.0,
            ),
            Oracle::PureCoagulation => ProblemSpec::new(
                FragmentationRate::zero(),
                DaughterDistribution::uniform(),
                CoagulationKernel::constant(1.0),
                2.0,
            ),
        }
    }

    pub fn detect(spec: &ProblemSpec) -> Option<Oracle> {
        let unit_exp = spec.initial == InitialCondition::exponential();
        let frag = spec.fragmentation == FragmentationRate::power(1.0, 1.0)
            && spec.daughter == DaughterDistribution::uniform();
        if unit_exp && frag && spec.coagulation.is_zero() {
            Some(Oracle::PureFragmentation)
        } else if unit_exp
            && spec.fragmentation.is_zero()
            && spec.coagulation == CoagulationKernel::constant(1.0)
        {
            Some(Oracle::PureCoagulation)
        } else {
            None
        }
    }

    pub fn density(self, t: f64, x: f64) -> f64 {
        match self {
            Oracle::PureFragmentation => (1.0 + t).powi(2) * (-x * (1.0 + t)).exp(),
            Oracle::PureCoagulation => 4.0 / (2.0 + t).powi(2) * (-2.0 * x / (2.0 + t)).exp(),
        }
    }

    /// `M₀(t)` of the untruncated solution.
    pub fn number(self, t: f64) -> f64 {
        match self {
            Oracle::PureFragmentation => 1.0 + t,
            Oracle::PureCoagulation => 2.0 / (2.0 + t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Oracle::PureFragmentation => "pure-frag",
            Oracle::PureCoagulation => "pure-coag",
        }
    }
}

impl std::str::FromStr for Oracle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pure-frag" => Ok(Oracle::PureFragmentation),
            "pure-coag" | "pure-coag-constant" => Ok(Oracle::PureCoagulation),
            other => Err(format!(
                "unknown case `{other}`, expected pure-frag or pure-coag"
            )),
        }
    }
}
