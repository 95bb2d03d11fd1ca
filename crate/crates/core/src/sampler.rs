//! The annealed Gibbs chain over dual transport potentials.
//!
//! State is the dual pair `(g, h)`, stored as `dual_row` / `dual_col`, plus
//! envelope statistics `upper[i] = min_j (M[i][j] + h[j])` and
//! `lower[j] = max_i (g[i] - M[i][j])`. A sweep alternates two half-steps:
//!
//! - column half-step: refresh `lower`, then `h[j] = lower[j] + theta * T / q[j]`
//! - row half-step: refresh `upper`, then `g[i] = upper[i] - theta * T / p[i]`
//!
//! with `theta` unit-exponential. Each draw is keyed by
//! `(seed, stream, half-step index, coordinate)`, so coordinates may be
//! updated in any order, or in parallel, without changing the trajectory,
//! and a chain resumed from a checkpoint continues the identical run.
//!
//! Every completed half-step leaves the state dual feasible
//! (`g[i] - h[j] <= M[i][j]`), because fresh potentials are sampled on the
//! feasible side of their envelope. The surrogate objective
//! `envelope_energy = <p, upper> - <q, lower>` is the quantity annealing
//! drives toward the exact transport cost, and `(upper, -lower)` is the
//! subgradient pair consumed by outer Wasserstein-loss minimizers.

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::plan::{PlanSource, TransportPlan};
use crate::rng::RngKey;

/// Coordinate counts at or above this use the rayon path inside a half-step.
const PAR_COORD_MIN: usize = 256;

/// Borrowed view of one transport problem; the chain reads `p` and `q` at
/// every half-step, so callers may swap marginals between sweeps (the NMF
/// warm start relies on this) as long as the cost matrix keeps its shape.
#[derive(Clone, Copy, Debug)]
pub struct OtProblem<'a> {
    pub p: &'a DiscreteMeasure,
    pub q: &'a DiscreteMeasure,
    pub cost: &'a CostMatrix,
}

impl<'a> OtProblem<'a> {
    pub fn new(p: &'a DiscreteMeasure, q: &'a DiscreteMeasure, cost: &'a CostMatrix) -> Result<Self> {
        if cost.rows() != p.len() || cost.cols() != q.len() {
            return Err(Error::DimensionMismatch(format!(
                "cost {}x{} against marginals {}x{}",
                cost.rows(),
                cost.cols(),
                p.len(),
                q.len()
            )));
        }
        Ok(OtProblem { p, q, cost })
    }

    pub fn rows(&self) -> usize {
        self.p.len()
    }

    pub fn cols(&self) -> usize {
        self.q.len()
    }
}

/// Chain state. Owns only the dual variables, envelopes, argmin/argmax
/// byproducts and the draw counters, not the problem data.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    /// dual potential g, row side
    pub dual_row: Vec<f64>,
    /// dual potential h, column side
    pub dual_col: Vec<f64>,
    /// min-statistics U
    pub upper: Vec<f64>,
    /// max-statistics L
    pub lower: Vec<f64>,
    /// per row i: the j attaining `upper[i]` in the latest row half-step
    pub argmin_col: Vec<usize>,
    /// per column j: the i attaining `lower[j]` in the latest column half-step
    pub argmax_row: Vec<usize>,
    /// completed sweeps
    pub sweeps: u64,
    /// completed half-steps (draw counter)
    pub half_steps: u64,
    pub key: RngKey,
}

/// Outcome of [`run_until_mixed`].
#[derive(Clone, Debug)]
pub struct MixReport {
    pub mixed: bool,
    pub sweeps_used: u32,
    pub final_v: f64,
    /// One `(sweep index, temperature, envelope energy)` row per sweep run.
    pub trace: Vec<(u64, f64, f64)>,
}

#[inline]
fn col_envelope(dual_row: &[f64], cost: &CostMatrix, j: usize) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0usize;
    for (i, &g) in dual_row.iter().enumerate() {
        let v = g - cost[(i, j)];
        if v > best {
            best = v;
            arg = i;
        }
    }
    (best, arg)
}

#[inline]
fn row_envelope(dual_col: &[f64], cost: &CostMatrix, i: usize) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut arg = 0usize;
    for (j, &h) in dual_col.iter().enumerate() {
        let v = cost[(i, j)] + h;
        if v < best {
            best = v;
            arg = j;
        }
    }
    (best, arg)
}

/// Fresh chain: zero potentials (feasible for nonnegative costs) with both
/// envelopes precomputed, so the surrogate energy is defined before the
/// first sweep.
pub fn init_chain(problem: &OtProblem, seed: u64) -> ChainState {
    init_chain_with_stream(problem, seed, 0)
}

/// As [`init_chain`] with an explicit stream id, for independent replicas
/// under one master seed.
pub fn init_chain_with_stream(problem: &OtProblem, seed: u64, stream: u64) -> ChainState {
    let (m1, m2) = (problem.rows(), problem.cols());
    let dual_row = vec![0.0; m1];
    let dual_col = vec![0.0; m2];
    let mut upper = vec![0.0; m1];
    let mut lower = vec![0.0; m2];
    let mut argmin_col = vec![0; m1];
    let mut argmax_row = vec![0; m2];
    for i in 0..m1 {
        let (u, j) = row_envelope(&dual_col, problem.cost, i);
        upper[i] = u;
        argmin_col[i] = j;
    }
    for j in 0..m2 {
        let (l, i) = col_envelope(&dual_row, problem.cost, j);
        lower[j] = l;
        argmax_row[j] = i;
    }
    ChainState {
        dual_row,
        dual_col,
        upper,
        lower,
        argmin_col,
        argmax_row,
        sweeps: 0,
        half_steps: 0,
        key: RngKey::new(seed, stream),
    }
}

impl ChainState {
    fn col_update(&mut self, problem: &OtProblem, temp: f64, theta: impl Fn(usize) -> f64 + Sync) {
        assert!(temp > 0.0, "temperature must be positive, got {temp}");
        let m2 = problem.cols();
        let rows = &self.dual_row;
        let cost = problem.cost;
        let q = &problem.q.weights;
        let compute = |j: usize| {
            let (bound, arg) = col_envelope(rows, cost, j);
            (bound, bound + theta(j) * temp / q[j], arg)
        };
        let updates: Vec<(f64, f64, usize)> = if m2 >= PAR_COORD_MIN {
            crate::parallel::map_indexed(m2, compute)
        } else {
            (0..m2).map(compute).collect()
        };
        for (j, (bound, potential, arg)) in updates.into_iter().enumerate() {
            self.lower[j] = bound;
            self.dual_col[j] = potential;
            self.argmax_row[j] = arg;
        }
        self.half_steps += 1;
    }

    fn row_update(&mut self, problem: &OtProblem, temp: f64, theta: impl Fn(usize) -> f64 + Sync) {
        assert!(temp > 0.0, "temperature must be positive, got {temp}");
        let m1 = problem.rows();
        let cols = &self.dual_col;
        let cost = problem.cost;
        let p = &problem.p.weights;
        let compute = |i: usize| {
            let (bound, arg) = row_envelope(cols, cost, i);
            (bound, bound - theta(i) * temp / p[i], arg)
        };
        let updates: Vec<(f64, f64, usize)> = if m1 >= PAR_COORD_MIN {
            crate::parallel::map_indexed(m1, compute)
        } else {
            (0..m1).map(compute).collect()
        };
        for (i, (bound, potential, arg)) in updates.into_iter().enumerate() {
            self.upper[i] = bound;
            self.dual_row[i] = potential;
            self.argmin_col[i] = arg;
        }
        self.half_steps += 1;
    }

    /// Column half-step: refresh `lower`, resample `dual_col` at `temp`.
    pub fn half_step_cols(&mut self, problem: &OtProblem, temp: f64) {
        let key = self.key;
        let step = self.half_steps;
        self.col_update(problem, temp, move |j| key.exp1(step, j as u64));
    }

    /// Row half-step: refresh `upper`, resample `dual_row` at `temp`.
    pub fn half_step_rows(&mut self, problem: &OtProblem, temp: f64) {
        let key = self.key;
        let step = self.half_steps;
        self.row_update(problem, temp, move |i| key.exp1(step, i as u64));
    }

    /// Column half-step with injected exponential draws (diagnostics and
    /// tests). Advances counters exactly like [`Self::half_step_cols`].
    pub fn half_step_cols_with_draws(&mut self, problem: &OtProblem, temp: f64, draws: &[f64]) {
        assert_eq!(draws.len(), problem.cols());
        self.col_update(problem, temp, |j| draws[j]);
    }

    /// Row half-step with injected exponential draws.
    pub fn half_step_rows_with_draws(&mut self, problem: &OtProblem, temp: f64, draws: &[f64]) {
        assert_eq!(draws.len(), problem.rows());
        self.row_update(problem, temp, |i| draws[i]);
    }

    /// One full sweep: column half-step at `t_odd`, then row half-step at
    /// `t_even`.
    pub fn sweep(&mut self, problem: &OtProblem, t_odd: f64, t_even: f64) {
        self.half_step_cols(problem, t_odd);
        self.half_step_rows(problem, t_even);
        self.sweeps += 1;
    }

    /// Surrogate energy `<p, upper> - <q, lower>` of the envelope statistics.
    pub fn envelope_energy(&self, problem: &OtProblem) -> f64 {
        dot(&problem.p.weights, &self.upper) - dot(&problem.q.weights, &self.lower)
    }

    /// Sampled dual objective `<p, g> - <q, h>`; never above
    /// [`Self::envelope_energy`].
    pub fn dual_energy(&self, problem: &OtProblem) -> f64 {
        dot(&problem.p.weights, &self.dual_row) - dot(&problem.q.weights, &self.dual_col)
    }

    /// `max_ij (g[i] - h[j] - M[i][j])`; nonpositive means dual feasible.
    pub fn feasibility_residual(&self, problem: &OtProblem) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, &g) in self.dual_row.iter().enumerate() {
            for (j, &h) in self.dual_col.iter().enumerate() {
                worst = worst.max(g - h - problem.cost[(i, j)]);
            }
        }
        worst
    }

    /// Sparse primal recovery from the latest half-step argmins/argmaxes:
    /// half the mass routed row-wise through `argmin_col`, half column-wise
    /// through `argmax_row`. At most `m1 + m2` triples, total mass 1.
    pub fn recover_plan(&self, problem: &OtProblem) -> Result<TransportPlan> {
        if self.sweeps == 0 {
            return Err(Error::ChainNotReady(
                "recover_plan needs at least one completed sweep".into(),
            ));
        }
        let mut triples = Vec::with_capacity(problem.rows() + problem.cols());
        for (i, &j) in self.argmin_col.iter().enumerate() {
            triples.push((i, j, 0.5 * problem.p.weights[i]));
        }
        for (j, &i) in self.argmax_row.iter().enumerate() {
            triples.push((i, j, 0.5 * problem.q.weights[j]));
        }
        TransportPlan::sparse(problem.rows(), problem.cols(), triples, PlanSource::GibbsRecovered)
    }

    /// The inexact-gradient pair `(upper, -lower)` for outer minimizers:
    /// `upper` is a subgradient in `p`, `-lower` in `q`, of the surrogate
    /// energy at fixed envelope statistics.
    pub fn gradient_pair(&self) -> (Vec<f64>, Vec<f64>) {
        (self.upper.clone(), self.lower.iter().map(|&l| -l).collect())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs constant-temperature sweeps until the mixing diagnostic fires or
/// `max_sweeps` is exhausted.
///
/// The diagnostic declares the chain mixed when the surrogate energy stops
/// increasing over a lag of `tau` sweeps:
/// `V(t) - V(t - tau) < 0.01 * tau * T * V(t)`, with the right-hand side
/// falling back to the absolute threshold `0.01 * tau * T` whenever
/// `V(t) <= 0` (the relative form is ill-posed there). Decreases count as
/// "stopped increasing".
pub fn run_until_mixed(
    state: &mut ChainState,
    problem: &OtProblem,
    temp: f64,
    tau: u32,
    max_sweeps: u32,
) -> MixReport {
    assert!(tau >= 1, "tau must be at least 1");
    let mut history = Vec::with_capacity(max_sweeps as usize + 1);
    history.push(state.envelope_energy(problem));
    let mut trace = Vec::with_capacity(max_sweeps as usize);
    for s in 1..=max_sweeps {
        state.sweep(problem, temp, temp);
        let v = state.envelope_energy(problem);
        history.push(v);
        trace.push((state.sweeps, temp, v));
        if s >= tau {
            let lagged = history[(s - tau) as usize];
            let threshold = 0.01 * tau as f64 * temp * if v > 0.0 { v } else { 1.0 };
            if v - lagged < threshold {
                return MixReport { mixed: true, sweeps_used: s, final_v: v, trace };
            }
        }
    }
    let final_v = *history.last().expect("history is never empty");
    MixReport { mixed: false, sweeps_used: max_sweeps, final_v, trace }
}
