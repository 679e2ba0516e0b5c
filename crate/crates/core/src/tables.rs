//! Sampled kernels loaded from CSV.
//!
//! Values are interpolated linearly in `ln x` (and `ln y`) between nodes and
//! clamped to the boundary nodes outside the sampled range. Anything built on
//! a table is a heuristic: a measurable kernel cannot be certified from samples.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-column table `(x, value)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table1d {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub values: Vec<f64>,
}

/// Three-column table `(x, y, value)` on a full tensor grid of nodes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table2d {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub y: Vec<f64>,
    /// Row-major, `values[i * y.len() + j]` is the value at `(x[i], y[j])`.
    #[serde(default)]
    pub values: Vec<f64>,
}

fn table_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Table {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn read_rows(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(vals) if vals.len() == columns => rows.push(vals),
            // A non-numeric first row is a header.
            Err(_) if line == 0 && rows.is_empty() => continue,
            Ok(vals) => {
                return Err(table_err(
                    path,
                    format!(
                        "row {}: expected {columns} columns, found {}",
                        line + 1,
                        vals.len()
                    ),
                ))
            }
            Err(e) => return Err(table_err(path, format!("row {}: {e}", line + 1))),
        }
    }
    Ok(rows)
}

fn check_nodes(nodes: &[f64], what: &str) -> std::result::Result<(), String> {
    if nodes.len() < 2 {
        return Err(format!("{what}: need at least two nodes"));
    }
    if nodes.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(format!("{what}: nodes must be positive and finite"));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("{what}: nodes must be strictly increasing"));
    }
    Ok(())
}

/// Locates `t` among `nodes` in log coordinates: returns `(k, w)` with the
/// value interpolated as `(1-w) v[k] + w v[k+1]`.
fn bracket(nodes: &[f64], t: f64) -> (usize, f64) {
    let last = nodes.len() - 1;
    if t <= nodes[0] {
        return (0, 0.0);
    }
    if t >= nodes[last] {
        return (last - 1, 1.0);
    }
    let k = nodes.partition_point(|&v| v <= t) - 1;
    let (l0, l1) = (nodes[k].ln(), nodes[k + 1].ln());
    (k, (t.ln() - l0) / (l1 - l0))
}

impl Table1d {
    pub fn new(x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let t = Table1d {
            path: None,
            x,
            values,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let rows = read_rows(path, 2)?;
        let t = Table1d {
            path: Some(path.to_path_buf()),
            x: rows.iter().map(|r| r[0]).collect(),
            values: rows.iter().map(|r| r[1]).collect(),
        };
        t.validate()?;
        Ok(t)
    }

    /// Loads the CSV named by `path` (relative to `base`) when no inline data is present.
    pub fn resolve(&mut self, base: &Path) -> Result<()> {
        if self.x.is_empty() {
            let Some(rel) = &self.path else {
                return Err(Error::Config(
                    "table needs either `path` or inline `x`/`values`".into(),
                ));
            };
            let full = base.join(rel);
            let loaded = Table1d::from_csv(&full)?;
            self.x = loaded.x;
            self.values = loaded.values;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let path = self.path.clone().unwrap_or_default();
        check_nodes(&self.x, "x").map_err(|m| table_err(&path, m))?;
        if self.values.len() != self.x.len() {
            return Err(table_err(&path, "x and values differ in length"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(table_err(&path, "non-finite value"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, w) = bracket(&self.x, x);
        if w == 0.0 {
            self.values[k]
        } else if w == 1.0 {
            self.values[k + 1]
        } else {
            (1.0 - w) * self.values[k] + w * self.values[k + 1]
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

impl Table2d {
    pub fn new(x: Vec<f64>, y: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let t = Table2d {
            path: None,
            x,
            y,
            values,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let rows = read_rows(path, 3)?;
        let mut xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let mut ys: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let mut values = vec![f64::NAN; xs.len() * ys.len()];
        for r in &rows {
            let i = xs.partition_point(|&v| v < r[0]);
            let j = ys.partition_point(|&v| v < r[1]);
            values[i * ys.len() + j] = r[2];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(table_err(
                path,
                "rows do not cover the full (x, y) node grid",
            ));
        }
        let t = Table2d {
            path: Some(path.to_path_buf()),
            x: xs,
            y: ys,
            values,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn resolve(&mut self, base: &Path) -> Result<()> {
        if self.x.is_empty() {
            let Some(rel) = &self.path else {
                return Err(Error::Config(
                    "table needs either `path` or inline `x`/`y`/`values`".into(),
                ));
            };
            let loaded = Table2d::from_csv(&base.join(rel))?;
            self.x = loaded.x;
            self.y = loaded.y;
            self.values = loaded.values;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let path = self.path.clone().unwrap_or_default();
        check_nodes(&self.x, "x").map_err(|m| table_err(&path, m))?;
        check_nodes(&self.y, "y").map_err(|m| table_err(&path, m))?;
        if self.values.len() != self.x.len() * self.y.len() {
            return Err(table_err(&path, "value count does not match the node grid"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(table_err(&path, "non-finite value"));
        }
        Ok(())
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.y.len() + j]
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (i, wx) = bracket(&self.x, x);
        let (j, wy) = bracket(&self.y, y);
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - wx) * ((1.0 - wy) * v00 + wy * v01) + wx * ((1.0 - wy) * v10 + wy * v11)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y[0], self.y[self.y.len() - 1])
    }
}
