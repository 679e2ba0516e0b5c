//! Numerical laboratory for the continuous coagulation–fragmentation equation
//!
//! ```text
//! ∂_t f = -a f + ∫_x^∞ a(y) b(x, y) f(y) dy + C f
//! ```
//!
//! The crate audits kernel triples `(a, b, k)`, discretizes the truncated
//! problem conservatively, integrates it with an exponential-Euler scheme and
//! checks moment identities and a-priori bounds along the way.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod diagnostics;
pub mod discretization;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod solver;
pub mod tables;

pub use admissibility::AdmissibilityReport;
pub use diagnostics::{MonitorConfig, MonitorReport, NormContext};
pub use discretization::{DensityField, DiscreteOperators, MassGrid, Spacing};
pub use error::{Error, Result};
pub use kernels::{
    CoagulationKernel, DaughterDistribution, FragmentationRate, InitialCondition, ProblemSpec,
};
pub use solver::{IntegratorControls, NegativityPolicy, SimulationTrace, Termination};
