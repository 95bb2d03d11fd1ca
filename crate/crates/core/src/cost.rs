//! Cost matrices and their constructors.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Index;

/// Construction provenance of a cost matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostKind {
    Euclidean { power: f64 },
    Coulomb { cap: f64 },
    Custom,
}

/// Nonnegative finite m1 x m2 cost matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    pub kind: CostKind,
}

impl CostMatrix {
    pub fn from_raw(rows: usize, cols: usize, data: Vec<f64>, kind: CostKind) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidCost(format!(
                "shape {rows}x{cols} does not match {} entries",
                data.len()
            )));
        }
        for (idx, &c) in data.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidCost(format!(
                    "entry {c} at ({}, {}) is negative or non-finite",
                    idx / cols,
                    idx % cols
                )));
            }
        }
        Ok(CostMatrix { rows, cols, data, kind })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m1 = rows.len();
        let m2 = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m2) {
            return Err(Error::InvalidCost("ragged rows".into()));
        }
        Self::from_raw(m1, m2, rows.into_iter().flatten().collect(), CostKind::Custom)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

impl Index<(usize, usize)> for CostMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

/// `entries[i][j] = ||xs[i] - ys[j]||^power`.
pub fn euclidean_cost(xs: &[Vec<f64>], ys: &[Vec<f64>], power: f64) -> Result<CostMatrix> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidCost("empty point set".into()));
    }
    if power <= 0.0 || !power.is_finite() {
        return Err(Error::InvalidParameter(format!("power {power} must be positive")));
    }
    let dim = xs[0].len();
    if xs.iter().chain(ys.iter()).any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch(
            "points of mixed dimension in euclidean_cost".into(),
        ));
    }
    let mut data = Vec::with_capacity(xs.len() * ys.len());
    for x in xs {
        for y in ys {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            data.push(d2.sqrt().powf(power));
        }
    }
    CostMatrix::from_raw(xs.len(), ys.len(), data, CostKind::Euclidean { power })
}

/// Capped inverse-distance cost on 1-D points: `min(1/|x - y|, cap)`, with
/// coincident points assigned the cap.
pub fn coulomb_cost(xs: &[f64], ys: &[f64], cap: f64) -> Result<CostMatrix> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidCost("empty point set".into()));
    }
    if cap <= 0.0 || !cap.is_finite() {
        return Err(Error::InvalidParameter(format!("cap {cap} must be positive")));
    }
    let mut data = Vec::with_capacity(xs.len() * ys.len());
    for &x in xs {
        for &y in ys {
            let d = (x - y).abs();
            data.push(if d == 0.0 { cap } else { (1.0 / d).min(cap) });
        }
    }
    CostMatrix::from_raw(xs.len(), ys.len(), data, CostKind::Coulomb { cap })
}
