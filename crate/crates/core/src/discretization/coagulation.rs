use ndarray::{Array1, Array2};

use super::grid::MassGrid;
use crate::error::Result;
use crate::kernels::ProblemSpec;

/// One unordered pair event `(i, j)`, `i <= j`, whose product `x_i + x_j`
/// lands between pivots `target` and `target + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairEvent {
    pub i: usize,
    pub j: usize,
    pub target: usize,
    /// Share of the product assigned to `target`; the rest goes to `target + 1`.
    pub eta: f64,
    /// `k(x_i, x_j) Δ_i Δ_j`, halved on the diagonal.
    pub weight: f64,
}

/// Fixed-pivot coagulation with the truncated kernel: pairs whose product
/// exceeds the last pivot never react.
#[derive(Clone, Debug)]
pub struct CoagulationOperator {
    /// `k_r(x_i, x_j)` at pivots, zero outside the admissible pairs.
    pub kernel: Array2<f64>,
    pub pairs: Vec<PairEvent>,
}

impl CoagulationOperator {
    pub fn assemble(spec: &ProblemSpec, grid: &MassGrid) -> Result<Self> {
        let n = grid.len();
        let x = grid.centers();
        let dx = grid.widths();
        let cap = grid.last_pivot();
        let mut kernel = Array2::zeros((n, n));
        let mut pairs = Vec::new();
        if spec.coagulation.is_zero() {
            return Ok(CoagulationOperator { kernel, pairs });
        }
        for i in 0..n {
            for j in i..n {
                let v = x[i] + x[j];
                if v > cap {
                    break;
                }
                let k = spec.eval_k(x[i], x[j])?;
                kernel[[i, j]] = k;
                kernel[[j, i]] = k;
                if k == 0.0 {
                    continue;
                }
                // Largest l with x_l <= v; v > x_j >= x_0 so l >= j.
                let l = x.partition_point(|&p| p <= v) - 1;
                let eta = if l + 1 == n {
                    1.0
                } else {
                    (x[l + 1] - v) / (x[l + 1] - x[l])
                };
                let fac = if i == j { 0.5 } else { 1.0 };
                pairs.push(PairEvent {
                    i,
                    j,
                    target: l,
                    eta,
                    weight: fac * k * dx[i] * dx[j],
                });
            }
        }
        Ok(CoagulationOperator { kernel, pairs })
    }

    pub fn is_zero(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `C f`.
    pub fn apply(&self, grid: &MassGrid, f: &[f64]) -> Vec<f64> {
        self.apply_bilinear(grid, f, f)
    }

    /// Symmetrised bilinear form `C(f, g)` with `C(f, f) = C f`.
    pub fn apply_bilinear(&self, grid: &MassGrid, f: &[f64], g: &[f64]) -> Vec<f64> {
        let n = grid.len();
        let dx = grid.widths();
        let mut out = vec![0.0; n];
        if self.is_zero() {
            return out;
        }
        for p in &self.pairs {
            let rate = p.weight * 0.5 * (f[p.i] * g[p.j] + f[p.j] * g[p.i]);
            if rate == 0.0 {
                continue;
            }
            out[p.target] += p.eta * rate / dx[p.target];
            if p.eta < 1.0 {
                out[p.target + 1] += (1.0 - p.eta) * rate / dx[p.target + 1];
            }
        }
        let fw = Array1::from_iter(f.iter().zip(dx).map(|(v, d)| v * d));
        let gw = Array1::from_iter(g.iter().zip(dx).map(|(v, d)| v * d));
        let kf = self.kernel.dot(&fw);
        let kg = self.kernel.dot(&gw);
        for i in 0..n {
            out[i] -= 0.5 * (f[i] * kg[i] + g[i] * kf[i]);
        }
        out
    }

    /// `½ ΣΣ χ(i, j) k_r f_i f_j Δ_i Δ_j` with `χ = Πθ(x_i + x_j) - θ(x_i) - θ(x_j)`,
    /// where `Πθ` interpolates `θ` between the two receiving pivots. This is
    /// the quantity the scheme reproduces exactly: it equals `Σ θ(x_i) Δ_i (C f)_i`.
    pub fn weak_form_theta(&self, grid: &MassGrid, f: &[f64], theta: impl Fn(f64) -> f64) -> f64 {
        let x = grid.centers();
        let th: Vec<f64> = x.iter().map(|&v| theta(v)).collect();
        self.pairs
            .iter()
            .map(|p| {
                let landed = if p.eta < 1.0 {
                    p.eta * th[p.target] + (1.0 - p.eta) * th[p.target + 1]
                } else {
                    th[p.target]
                };
                p.weight * f[p.i] * f[p.j] * (landed - th[p.i] - th[p.j])
            })
            .sum()
    }

    /// Same double sum with the exact `χ_θ(x, y) = θ(x + y) - θ(x) - θ(y)`.
    pub fn weak_form_theta_continuous(
        &self,
        grid: &MassGrid,
        f: &[f64],
        theta: impl Fn(f64) -> f64,
    ) -> f64 {
        let x = grid.centers();
        self.pairs
            .iter()
            .map(|p| {
                let chi = theta(x[p.i] + x[p.j]) - theta(x[p.i]) - theta(x[p.j]);
                p.weight * f[p.i] * f[p.j] * chi
            })
            .sum()
    }
}
