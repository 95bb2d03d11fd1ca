//! Transport plans (couplings) and their evaluation.

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use serde::{Deserialize, Serialize};

/// How a plan was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSource {
    Exact,
    GibbsRecovered,
    Sinkhorn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PlanEntries {
    Dense(Vec<f64>),
    /// `(row, col, mass)` triples, 0-based.
    Sparse(Vec<(usize, usize, f64)>),
}

/// A nonnegative coupling between two measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    pub entries: PlanEntries,
    pub source: PlanSource,
}

impl TransportPlan {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>, source: PlanSource) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "dense plan of {} entries for shape {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidParameter("negative or non-finite plan mass".into()));
        }
        Ok(TransportPlan { rows, cols, entries: PlanEntries::Dense(data), source })
    }

    pub fn sparse(
        rows: usize,
        cols: usize,
        triples: Vec<(usize, usize, f64)>,
        source: PlanSource,
    ) -> Result<Self> {
        for &(i, j, m) in &triples {
            if i >= rows || j >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "triple ({i}, {j}) outside shape {rows}x{cols}"
                )));
            }
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidParameter("negative or non-finite plan mass".into()));
            }
        }
        Ok(TransportPlan { rows, cols, entries: PlanEntries::Sparse(triples), source })
    }

    pub fn total_mass(&self) -> f64 {
        match &self.entries {
            PlanEntries::Dense(d) => d.iter().sum(),
            PlanEntries::Sparse(t) => t.iter().map(|&(_, _, m)| m).sum(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.entries {
            PlanEntries::Dense(d) => d.clone(),
            PlanEntries::Sparse(t) => {
                let mut d = vec![0.0; self.rows * self.cols];
                for &(i, j, m) in t {
                    d[i * self.cols + j] += m;
                }
                d
            }
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.rows];
        self.for_each(|i, _, m| sums[i] += m);
        sums
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        self.for_each(|_, j, m| sums[j] += m);
        sums
    }

    fn for_each(&self, mut f: impl FnMut(usize, usize, f64)) {
        match &self.entries {
            PlanEntries::Dense(d) => {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        f(i, j, d[i * self.cols + j]);
                    }
                }
            }
            PlanEntries::Sparse(t) => {
                for &(i, j, m) in t {
                    f(i, j, m);
                }
            }
        }
    }

    /// Objective value `sum_ij Z_ij M_ij`.
    pub fn transport_cost(&self, cost: &CostMatrix) -> Result<f64> {
        if cost.rows() != self.rows || cost.cols() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "plan {}x{} against cost {}x{}",
                self.rows,
                self.cols,
                cost.rows(),
                cost.cols()
            )));
        }
        let mut total = 0.0;
        self.for_each(|i, j, m| total += m * cost[(i, j)]);
        Ok(total)
    }

    /// `(max_i |row_sum_i - p_i|, max_j |col_sum_j - q_j|)`.
    pub fn marginal_residual(
        &self,
        p: &DiscreteMeasure,
        q: &DiscreteMeasure,
    ) -> Result<(f64, f64)> {
        if p.len() != self.rows || q.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "plan {}x{} against marginals {}x{}",
                self.rows,
                self.cols,
                p.len(),
                q.len()
            )));
        }
        let row = self
            .row_sums()
            .iter()
            .zip(&p.weights)
            .map(|(s, w)| (s - w).abs())
            .fold(0.0, f64::max);
        let col = self
            .col_sums()
            .iter()
            .zip(&q.weights)
            .map(|(s, w)| (s - w).abs())
            .fold(0.0, f64::max);
        Ok((row, col))
    }
}
