//! Truncated problem on a finite mass grid.

mod coagulation;
mod fragmentation;
mod grid;

use std::io::Write;
use std::sync::Arc;

use ndarray::Array2;

pub use coagulation::{CoagulationOperator, PairEvent};
pub use fragmentation::FragmentationOperator;
pub use grid::{DensityField, MassGrid, Spacing, AUTO_GEOMETRIC_SPAN};

use crate::error::Result;
use crate::kernels::ProblemSpec;

/// Assembled operators of one truncated problem. Immutable once built.
#[derive(Clone, Debug)]
pub struct DiscreteOperators {
    pub grid: Arc<MassGrid>,
    pub fragmentation: FragmentationOperator,
    pub coagulation: CoagulationOperator,
    /// `-diag(a) + B diag(Δ)`, the linear part of the cell ODE.
    pub generator: Array2<f64>,
}

impl DiscreteOperators {
    pub fn assemble(spec: &ProblemSpec, grid: Arc<MassGrid>) -> Result<Self> {
        let fragmentation = FragmentationOperator::assemble(spec, &grid)?;
        let coagulation = CoagulationOperator::assemble(spec, &grid)?;
        let generator = fragmentation.generator(&grid);
        log::debug!(
            "assembled {} cells, {} coagulation pairs, column-identity defect {:.2e}",
            grid.len(),
            coagulation.pairs.len(),
            fragmentation.mass_identity_defect(&grid)
        );
        Ok(DiscreteOperators {
            grid,
            fragmentation,
            coagulation,
            generator,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `F f = (-A + B) f`.
    pub fn apply_fragmentation(&self, f: &[f64]) -> Vec<f64> {
        self.fragmentation.apply(&self.grid, f)
    }

    /// `C f`.
    pub fn apply_coagulation(&self, f: &[f64]) -> Vec<f64> {
        self.coagulation.apply(&self.grid, f)
    }

    pub fn weak_form_theta(&self, f: &[f64], theta: impl Fn(f64) -> f64) -> f64 {
        self.coagulation.weak_form_theta(&self.grid, f, theta)
    }

    /// Right-hand side `F f + C f`.
    pub fn rhs(&self, f: &[f64]) -> Vec<f64> {
        let mut out = self.apply_fragmentation(f);
        if !self.coagulation.is_zero() {
            for (o, c) in out.iter_mut().zip(self.apply_coagulation(f)) {
                *o += c;
            }
        }
        out
    }

    /// Writes grid, generator and coagulation kernel as matrix-market
    /// coordinate sections, one after another.
    pub fn dump_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        writeln!(w, "%%MatrixMarket matrix array real general")?;
        writeln!(w, "% grid: left edge, pivot, width")?;
        writeln!(w, "{} 3", g.len())?;
        for col in [&g.edges()[..g.len()], g.centers(), g.widths()] {
            for v in col {
                writeln!(w, "{v:.17e}")?;
            }
        }
        write_coordinate(
            &mut w,
            "fragmentation generator -diag(a) + B diag(dx)",
            &self.generator,
        )?;
        write_coordinate(
            &mut w,
            "truncated coagulation kernel at pivots",
            &self.coagulation.kernel,
        )?;
        Ok(())
    }
}

fn write_coordinate<W: Write>(w: &mut W, title: &str, m: &Array2<f64>) -> Result<()> {
    let nnz = m.iter().filter(|&&v| v != 0.0).count();
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "% {title}")?;
    writeln!(w, "{} {} {nnz}", m.nrows(), m.ncols())?;
    for ((i, j), &v) in m.indexed_iter() {
        if v != 0.0 {
            writeln!(w, "{} {} {v:.17e}", i + 1, j + 1)?;
        }
    }
    Ok(())
}
