use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::grid::MassGrid;
use crate::error::{Error, Result};
use crate::kernels::ProblemSpec;

/// Cell realisation of `F f = -a f + ∫_x^∞ a(y) b(x, y) f(y) dy` on a
/// truncated grid.
///
/// `gain[[i, j]]` is the density (per unit mass) of fragments landing in cell
/// `i` per unit parent density at pivot `x_j`, so that
/// `(B f)_i = Σ_j gain[[i, j]] f_j Δ_j`. Each column is rescaled so that
/// `Σ_i x_i Δ_i gain[[i, j]] = x_j loss[j]` holds to round-off.
#[derive(Clone, Debug)]
pub struct FragmentationOperator {
    /// `a_r(x_j)`.
    pub loss: Vec<f64>,
    pub gain: Array2<f64>,
    /// Factor applied to each column to enforce the mass identity
    /// (1 where the column is empty).
    pub column_scale: Vec<f64>,
}

impl FragmentationOperator {
    pub fn assemble(spec: &ProblemSpec, grid: &MassGrid) -> Result<Self> {
        let n = grid.len();
        let x = grid.centers();
        let dx = grid.widths();
        let edges = grid.edges();

        let loss = x
            .iter()
            .map(|&xj| spec.fragmentation.eval(xj))
            .collect::<Result<Vec<f64>>>()?;

        // Column j only touches cells 0..=j, so columns assemble independently.
        let columns: Vec<(Vec<f64>, f64)> = (0..n)
            .into_par_iter()
            .map(|j| -> Result<(Vec<f64>, f64)> {
                let aj = loss[j];
                let mut col = vec![0.0; j + 1];
                if aj == 0.0 {
                    return Ok((col, 1.0));
                }
                for (i, c) in col.iter_mut().enumerate() {
                    let count = match spec.daughter.cell_integral(edges[i], edges[i + 1], x[j]) {
                        Ok(v) => v,
                        // Infinitely many dust fragments in the first cell: keep
                        // their mass, represented at the pivot.
                        Err(Error::Divergent(_)) if i == 0 => {
                            spec.daughter.cell_mass(edges[0], edges[1], x[j])? / x[0]
                        }
                        Err(e) => return Err(e),
                    };
                    if !(count >= 0.0) {
                        return Err(Error::Assembly(format!(
                            "negative fragment count {count} in cell {i} from parent {j}"
                        )));
                    }
                    *c = aj * count / dx[i];
                }
                let mass: f64 = col.iter().enumerate().map(|(i, c)| x[i] * dx[i] * c).sum();
                if !(mass > 0.0 && mass.is_finite()) {
                    return Err(Error::Assembly(format!(
                        "parent cell {j} produces no representable fragment mass"
                    )));
                }
                let scale = x[j] * aj / mass;
                col.iter_mut().for_each(|c| *c *= scale);
                Ok((col, scale))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut gain = Array2::zeros((n, n));
        let mut column_scale = Vec::with_capacity(n);
        for (j, (col, scale)) in columns.into_iter().enumerate() {
            for (i, c) in col.into_iter().enumerate() {
                gain[[i, j]] = c;
            }
            column_scale.push(scale);
        }
        Ok(FragmentationOperator {
            loss,
            gain,
            column_scale,
        })
    }

    pub fn len(&self) -> usize {
        self.loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loss.is_empty()
    }

    /// Generator matrix `G = -diag(a) + gain · diag(Δ)` acting on cell values.
    pub fn generator(&self, grid: &MassGrid) -> Array2<f64> {
        let dx = grid.widths();
        let mut g = self.gain.clone();
        for ((_, j), v) in g.indexed_iter_mut() {
            *v *= dx[j];
        }
        for (j, &a) in self.loss.iter().enumerate() {
            g[[j, j]] -= a;
        }
        g
    }

    /// `(-A f + B f)_i`.
    pub fn apply(&self, grid: &MassGrid, f: &[f64]) -> Vec<f64> {
        let weighted = Array1::from_iter(f.iter().zip(grid.widths()).map(|(v, d)| v * d));
        let gain = self.gain.dot(&weighted);
        gain.iter()
            .zip(f.iter().zip(&self.loss))
            .map(|(g, (v, a))| g - a * v)
            .collect()
    }

    /// Largest relative defect of the column mass identity.
    pub fn mass_identity_defect(&self, grid: &MassGrid) -> f64 {
        let x = grid.centers();
        let dx = grid.widths();
        (0..self.len())
            .filter(|&j| self.loss[j] > 0.0)
            .map(|j| {
                let s: f64 = (0..=j).map(|i| x[i] * dx[i] * self.gain[[i, j]]).sum();
                (s / (x[j] * self.loss[j]) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}
