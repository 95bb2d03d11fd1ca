//! Entropic-regularization baseline.
//!
//! Alternating scaling of the dual potentials of the entropy-regularized
//! transport problem, carried out entirely in the log domain (max-stabilized
//! log-sum-exp), so the regularization can be pushed to values where the
//! vanilla multiplicative form overflows. For two marginals the iterative
//! Bregman projection onto the coupling constraints and Sinkhorn scaling are
//! the same algorithm; this is that one implementation under either name.

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::parallel;
use crate::plan::{PlanSource, TransportPlan};
use crate::sampler::OtProblem;

#[derive(Clone, Copy, Debug)]
pub struct SinkhornConfig {
    /// regularization strength, same units as the cost
    pub epsilon: f64,
    pub max_iters: u32,
    /// marginal-residual threshold declaring convergence
    pub tol: f64,
}

impl SinkhornConfig {
    pub fn new(epsilon: f64, max_iters: u32, tol: f64) -> Result<Self> {
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
        }
        if tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("tol {tol} must be positive")));
        }
        Ok(SinkhornConfig { epsilon, max_iters, tol })
    }
}

#[derive(Clone, Debug)]
pub struct SinkhornResult {
    pub plan: TransportPlan,
    pub iterations: u32,
    /// max marginal deviation of the returned plan
    pub residual: f64,
    pub converged: bool,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Entropic transport by stabilized alternating scaling. Returns the plan
/// built from the final potentials together with its actual marginal
/// residual; running out of iterations is reported, not fatal.
pub fn sinkhorn(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    cost: &CostMatrix,
    config: &SinkhornConfig,
) -> Result<SinkhornResult> {
    let problem = OtProblem::new(p, q, cost)?;
    let (m1, m2) = (problem.rows(), problem.cols());
    let eps = config.epsilon;
    let mut alpha = vec![0.0f64; m1];
    let mut beta = vec![0.0f64; m2];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < config.max_iters {
        iterations += 1;
        alpha = parallel::map_indexed(m1, |i| {
            let lse = log_sum_exp((0..m2).map(|j| (beta[j] - cost[(i, j)]) / eps));
            eps * p.weights[i].ln() - eps * lse
        });
        beta = parallel::map_indexed(m2, |j| {
            let lse = log_sum_exp((0..m1).map(|i| (alpha[i] - cost[(i, j)]) / eps));
            eps * q.weights[j].ln() - eps * lse
        });
        residual = marginal_residual(&alpha, &beta, cost, p, q, eps);
        if residual <= config.tol {
            break;
        }
    }
    let mut entries = Vec::with_capacity(m1 * m2);
    for i in 0..m1 {
        for j in 0..m2 {
            entries.push(((alpha[i] + beta[j] - cost[(i, j)]) / eps).exp());
        }
    }
    let plan = TransportPlan::dense(m1, m2, entries, PlanSource::Sinkhorn)?;
    Ok(SinkhornResult { plan, iterations, residual, converged: residual <= config.tol })
}

fn marginal_residual(
    alpha: &[f64],
    beta: &[f64],
    cost: &CostMatrix,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    eps: f64,
) -> f64 {
    let (m1, m2) = (alpha.len(), beta.len());
    let rows = parallel::map_indexed(m1, |i| {
        (0..m2).map(|j| ((alpha[i] + beta[j] - cost[(i, j)]) / eps).exp()).sum::<f64>()
    });
    let mut worst = 0.0f64;
    let mut col_sums = vec![0.0f64; m2];
    for i in 0..m1 {
        worst = worst.max((rows[i] - p.weights[i]).abs());
        for j in 0..m2 {
            col_sums[j] += ((alpha[i] + beta[j] - cost[(i, j)]) / eps).exp();
        }
    }
    for j in 0..m2 {
        worst = worst.max((col_sums[j] - q.weights[j]).abs());
    }
    worst
}
