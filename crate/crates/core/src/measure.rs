//! Discrete probability measures on the simplex.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smallest admissible weight after ingestion. The dual formulation needs
/// strictly positive marginals, so zero weights are floored here and the
/// vector renormalized.
pub const WEIGHT_FLOOR: f64 = 1e-9;

/// A point on the simplex, optionally carrying support coordinates in R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<Vec<f64>>>,
}

impl DiscreteMeasure {
    /// Normalizes raw nonnegative weights onto the simplex, flooring each
    /// entry at [`WEIGHT_FLOOR`] first.
    pub fn new(raw_weights: Vec<f64>, support: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if raw_weights.is_empty() {
            return Err(Error::InvalidMeasure("empty weight vector".into()));
        }
        for (i, &w) in raw_weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "weight {w} at index {i} is negative or non-finite"
                )));
            }
        }
        let total: f64 = raw_weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidMeasure("all weights are zero".into()));
        }
        if let Some(ref pts) = support {
            if pts.len() != raw_weights.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} support points for {} weights",
                    pts.len(),
                    raw_weights.len()
                )));
            }
        }
        let floored: Vec<f64> = raw_weights.iter().map(|&w| w.max(WEIGHT_FLOOR)).collect();
        let norm: f64 = floored.iter().sum();
        let weights = floored.iter().map(|&w| w / norm).collect();
        Ok(DiscreteMeasure { weights, support })
    }

    /// Uniform measure on `m` atoms.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m], None)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Free-function alias mirroring the construction contract.
pub fn make_measure(raw_weights: Vec<f64>, support: Option<Vec<Vec<f64>>>) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(raw_weights, support)
}
