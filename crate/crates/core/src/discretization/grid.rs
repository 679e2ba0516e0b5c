use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Cell layout of a truncated mass axis `(0, R]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    /// Edges `R * ratio^(k - n)` for `k = 1..n` after the first edge at 0.
    /// Without a ratio the first interior edge is placed at `R * 1e-5`.
    Geometric {
        #[serde(default)]
        ratio: Option<f64>,
    },
}

impl Default for Spacing {
    fn default() -> Self {
        Spacing::Geometric { ratio: None }
    }
}

/// Span of an automatic geometric grid, `R / x_{3/2}`.
pub const AUTO_GEOMETRIC_SPAN: f64 = 1e5;

/// Cell edges `0 = x_{1/2} < ... < x_{n+1/2} = R` with arithmetic-midpoint
/// pivots `x_j` and widths `Δ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassGrid {
    edges: Vec<f64>,
    centers: Vec<f64>,
    widths: Vec<f64>,
}

impl MassGrid {
    pub fn build(radius: f64, n: usize, spacing: Spacing) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Grid(format!(
                "radius must be positive, got {radius}"
            )));
        }
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 cells, got {n}")));
        }
        let edges = match spacing {
            Spacing::Uniform => (0..=n).map(|k| radius * k as f64 / n as f64).collect(),
            Spacing::Geometric { ratio } => {
                if n < 8 {
                    return Err(Error::Grid(format!(
                        "geometric grids need at least 8 cells, got {n}"
                    )));
                }
                let ratio = match ratio {
                    Some(r) => r,
                    None => AUTO_GEOMETRIC_SPAN.powf(1.0 / (n - 1) as f64),
                };
                if !(ratio > 1.0 && ratio.is_finite()) {
                    return Err(Error::Grid(format!(
                        "geometric ratio must exceed 1, got {ratio}"
                    )));
                }
                let mut edges = Vec::with_capacity(n + 1);
                edges.push(0.0);
                for k in 1..n {
                    edges.push(radius * ratio.powi(k as i32 - n as i32));
                }
                edges.push(radius);
                let grid_below = edges
                    .iter()
                    .skip(1)
                    .filter(|&&e| e <= radius / 100.0)
                    .count();
                if 4 * grid_below < n {
                    return Err(Error::Grid(format!(
                        "ratio {ratio} leaves only {grid_below} of {n} cells below R/100"
                    )));
                }
                edges
            }
        };
        Self::from_edges(edges)
    }

    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::Grid("need at least 2 cells".into()));
        }
        if edges[0] != 0.0 {
            return Err(Error::Grid(format!(
                "first edge must be 0, got {}",
                edges[0]
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid(
                "edges must be finite and strictly increasing".into(),
            ));
        }
        let centers: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
        if centers
            .iter()
            .zip(edges.windows(2))
            .any(|(&c, w)| !(c > w[0] && c < w[1]))
        {
            return Err(Error::Grid(
                "cells too narrow to hold an interior pivot".into(),
            ));
        }
        Ok(MassGrid {
            edges,
            centers,
            widths,
        })
    }

    /// The first `n` cells, sharing edges bit-for-bit with `self`.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n < 2 || n > self.len() {
            return Err(Error::Grid(format!(
                "prefix of {n} cells out of range 2..={}",
                self.len()
            )));
        }
        Self::from_edges(self.edges[..=n].to_vec())
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn radius(&self) -> f64 {
        *self.edges.last().expect("grid has edges")
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Largest pivot; coagulation products beyond it cannot be represented.
    pub fn last_pivot(&self) -> f64 {
        self.centers[self.centers.len() - 1]
    }

    /// Index of the last cell whose right edge does not exceed `radius`
    /// (within a relative 1e-9), plus one.
    pub fn cells_within(&self, radius: f64) -> usize {
        self.edges[1..]
            .iter()
            .take_while(|&&e| e <= radius * (1.0 + 1e-9))
            .count()
    }
}

/// Nonnegative number density `f_j` on the cells of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    grid: Arc<MassGrid>,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Arc<MassGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "field has {} values for {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(DensityField { grid, values })
    }

    pub fn zeros(grid: Arc<MassGrid>) -> Self {
        let n = grid.len();
        DensityField {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Single cell `j` holding `value`.
    pub fn indicator(grid: Arc<MassGrid>, j: usize, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.values[j] = value;
        f
    }

    /// Mass-preserving projection: `f_j = ∫_cell x f(x) dx / (x_j Δ_j)`, so
    /// every cell carries exactly the mass of the continuous density.
    pub fn project<F: Fn(f64) -> f64>(grid: Arc<MassGrid>, density: F) -> Result<Self> {
        Self::project_with_breaks(grid, density, &[])
    }

    pub fn project_with_breaks<F: Fn(f64) -> f64>(
        grid: Arc<MassGrid>,
        density: F,
        breaks: &[f64],
    ) -> Result<Self> {
        let tol = Tolerance {
            abs: 1e-16,
            rel: 1e-13,
            max_intervals: 200,
        };
        let mut values = Vec::with_capacity(grid.len());
        for (j, w) in grid.edges().windows(2).enumerate() {
            let mut pts = vec![w[0]];
            pts.extend(breaks.iter().copied().filter(|&b| b > w[0] && b < w[1]));
            pts.push(w[1]);
            let mut mass = 0.0;
            for seg in pts.windows(2) {
                mass += quadrature::integrate(|x| x * density(x), seg[0], seg[1], tol)?.value;
            }
            values.push(mass / (grid.centers()[j] * grid.widths()[j]));
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<MassGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// `Σ x_j^m f_j Δ_j`
    pub fn moment(&self, m: f64) -> f64 {
        crate::diagnostics::moment_of(&self.grid, &self.values, m)
    }
}
