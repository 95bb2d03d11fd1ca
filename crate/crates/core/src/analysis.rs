//! Finite-time annealing diagnostics for the chain.
//!
//! Everything here is a pure function of a frozen `(upper, lower)` snapshot:
//!
//! - `max_exp_expectation`: closed-form mean of the max of independent
//!   "reversed" exponentials with c.d.f. `min{exp(w_i (x - z_i)), 1}`,
//!   the oracle behind the conditional-mean statistics.
//! - `compute_phi` / `compute_psi`: the per-coordinate statistics giving the
//!   one-half-step conditional means
//!   `E[lower_j' | upper] = upper[I_j] - M[I_j][j] - phi_j * T` and
//!   `E[upper_i' | lower] = M[i][J_i] + lower[J_i] + psi_i * T`.
//! - `expected_drift`: the conditional mean change of the surrogate energy
//!   over the next half-step at temperature `T`.
//! - `critical_temperature`: the unique `T` at which that drift vanishes
//!   (the statistics depend on `T`, so this is a fixed point solved by
//!   bisection, not a closed form).
//! - `ResidualTracker`: the martingale residual `r(n) = V(z(n)) - sum of
//!   past drifts`, whose increments have zero conditional mean and obey the
//!   deterministic lower bound `r(n) - r(n+1) <= C(n) * T(n)`.
//! - `evaluate_bounds`: Hoeffding-style tail bounds on `r` for a prescribed
//!   step-bound array.

use crate::error::{Error, Result};
use crate::sampler::{ChainState, OtProblem};
use serde::{Deserialize, Serialize};

/// Which transition of the alternating chain a statistic refers to.
///
/// `RowUpdate` is the odd-indexed transition (the row envelope is refreshed;
/// uses `psi`), `ColUpdate` the even-indexed one (column envelope; `phi`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    RowUpdate,
    ColUpdate,
}

/// Endpoints and rates of independent reversed exponentials: variable `i`
/// has c.d.f. `min{exp(rates[i] * (x - endpoints[i])), 1}`, i.e. it sits at
/// `endpoints[i]` minus an Exponential(rates[i]) excess.
#[derive(Clone, Debug)]
pub struct MaxExpSpec {
    endpoints: Vec<f64>,
    rates: Vec<f64>,
}

impl MaxExpSpec {
    pub fn new(endpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if endpoints.is_empty() || endpoints.len() != rates.len() {
            return Err(Error::InvalidParameter(
                "endpoints and rates must be nonempty and equal length".into(),
            ));
        }
        if rates.iter().any(|&w| !w.is_finite() || w <= 0.0) {
            return Err(Error::InvalidParameter("rates must be positive and finite".into()));
        }
        Ok(MaxExpSpec { endpoints, rates })
    }

    pub fn len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.endpoints.is_empty()
    }
}

/// Exact mean of `max{e_1, ..., e_n}` for a [`MaxExpSpec`].
///
/// With endpoints sorted nonincreasing, prefix rate sums `W_i` and
/// `h_i = exp[W_i (z_{i+1} - z_i)]` (with `h_n = 0`), the mean is
/// `z_1 - sum_i (1 - h_i) (prod_{j<i} h_j) / W_i`.
pub fn max_exp_expectation(spec: &MaxExpSpec) -> f64 {
    let n = spec.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        spec.endpoints[b]
            .partial_cmp(&spec.endpoints[a])
            .expect("finite endpoints")
            .then(a.cmp(&b))
    });
    let top = spec.endpoints[order[0]];
    let mut rate_sum = 0.0;
    let mut carry = 1.0; // prod_{j<i} h_j
    let mut deficit = 0.0;
    for (k, &idx) in order.iter().enumerate() {
        rate_sum += spec.rates[idx];
        let h = if k + 1 < n {
            let gap = spec.endpoints[order[k + 1]] - spec.endpoints[idx];
            (rate_sum * gap).exp()
        } else {
            0.0
        };
        deficit += (1.0 - h) * carry / rate_sum;
        carry *= h;
    }
    top - deficit
}

/// Column statistic: `(phi_j, I_j)` for one column, from the row envelope
/// `upper`, the column `cost_col` of the cost matrix, row weights `p` and
/// temperature `temp`. Ties in the sort break to the lowest row index,
/// matching the sampler's argmax rule.
pub fn compute_phi(upper: &[f64], cost_col: &[f64], p: &[f64], temp: f64) -> Result<(f64, usize)> {
    sorted_stat(upper.len(), temp, p, |i| upper[i] - cost_col[i], SortSide::Descending)
}

/// Row statistic: `(psi_i, J_i)` for one row, from the column envelope
/// `lower`, the row `cost_row`, column weights `q` and temperature `temp`.
pub fn compute_psi(lower: &[f64], cost_row: &[f64], q: &[f64], temp: f64) -> Result<(f64, usize)> {
    sorted_stat(lower.len(), temp, q, |j| cost_row[j] + lower[j], SortSide::Ascending)
}

enum SortSide {
    Descending,
    Ascending,
}

/// Shared core of `phi`/`psi`: with endpoints sorted toward the extreme the
/// update reaches first, prefix weight sums `W_k` and decay factors
/// `h_k = exp[W_k * (gap to the next endpoint) / temp] <= 1`, the statistic
/// is `sum_k (1 - h_k) (prod_{l<k} h_l) / W_k` and the index is the
/// sorted-first coordinate.
fn sorted_stat(
    n: usize,
    temp: f64,
    weights: &[f64],
    endpoint: impl Fn(usize) -> f64,
    side: SortSide,
) -> Result<(f64, usize)> {
    if temp <= 0.0 || !temp.is_finite() {
        return Err(Error::InvalidParameter(format!("temperature {temp} must be positive")));
    }
    if n == 0 || weights.len() != n {
        return Err(Error::DimensionMismatch("empty or mismatched statistic input".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (endpoint(a), endpoint(b));
        let cmp = match side {
            SortSide::Descending => eb.partial_cmp(&ea),
            SortSide::Ascending => ea.partial_cmp(&eb),
        };
        cmp.expect("finite endpoints").then(a.cmp(&b))
    });
    let mut weight_sum = 0.0;
    let mut carry = 1.0;
    let mut stat = 0.0;
    for (k, &idx) in order.iter().enumerate() {
        weight_sum += weights[idx];
        let h = if k + 1 < n {
            let gap = match side {
                SortSide::Descending => endpoint(order[k + 1]) - endpoint(idx),
                SortSide::Ascending => endpoint(idx) - endpoint(order[k + 1]),
            };
            (weight_sum * gap / temp).exp()
        } else {
            0.0
        };
        stat += (1.0 - h) * carry / weight_sum;
        carry *= h;
    }
    Ok((stat, order[0]))
}

/// Per-snapshot concentration ingredients.
#[derive(Clone, Debug)]
pub struct SweepStats {
    /// phi_j per column
    pub phi: Vec<f64>,
    /// psi_i per row
    pub psi: Vec<f64>,
    /// I_j: row attaining `max_i (upper[i] - M[i][j])` per column
    pub argmax_rows: Vec<usize>,
    /// J_i: column attaining `min_j (M[i][j] + lower[j])` per row
    pub argmin_cols: Vec<usize>,
    /// `<psi, p>`, the odd-step bound coefficient
    pub c_odd: f64,
    /// `<phi, q>`, the even-step bound coefficient
    pub c_even: f64,
    /// `sum_i p_i * regret(M[i][.] + lower; q)`
    pub d_odd: f64,
    /// `sum_j q_j * regret(M[.][j] - upper; p)`
    pub d_even: f64,
}

/// Regret of `x` under weights `w`: `<w, x> - min_i x_i`; nonnegative on the
/// simplex, zero iff the weighted mean already sits at the minimum.
pub fn regret(x: &[f64], w: &[f64]) -> f64 {
    let mean: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    mean - min
}

/// Computes every per-coordinate statistic of the snapshot at temperature
/// `temp`. Cost: one `O(m log m)` sort per coordinate.
pub fn concentration_ingredients(
    state: &ChainState,
    problem: &OtProblem,
    temp: f64,
) -> Result<SweepStats> {
    let (m1, m2) = (problem.rows(), problem.cols());
    let p = &problem.p.weights;
    let q = &problem.q.weights;
    let mut phi = Vec::with_capacity(m2);
    let mut argmax_rows = Vec::with_capacity(m2);
    for j in 0..m2 {
        let col = problem.cost.column(j);
        let (f, i) = compute_phi(&state.upper, &col, p, temp)?;
        phi.push(f);
        argmax_rows.push(i);
    }
    let mut psi = Vec::with_capacity(m1);
    let mut argmin_cols = Vec::with_capacity(m1);
    for i in 0..m1 {
        let row = problem.cost.row(i);
        let (f, j) = compute_psi(&state.lower, row, q, temp)?;
        psi.push(f);
        argmin_cols.push(j);
    }
    let c_odd: f64 = psi.iter().zip(p).map(|(a, b)| a * b).sum();
    let c_even: f64 = phi.iter().zip(q).map(|(a, b)| a * b).sum();
    assert!(c_odd > 0.0 && c_even > 0.0, "bound coefficients must be positive");
    let mut d_odd = 0.0;
    for i in 0..m1 {
        let x: Vec<f64> = (0..m2).map(|j| problem.cost[(i, j)] + state.lower[j]).collect();
        d_odd += p[i] * regret(&x, q);
    }
    let mut d_even = 0.0;
    for j in 0..m2 {
        let x: Vec<f64> = (0..m1).map(|i| problem.cost[(i, j)] - state.upper[i]).collect();
        d_even += q[j] * regret(&x, p);
    }
    Ok(SweepStats { phi, psi, argmax_rows, argmin_cols, c_odd, c_even, d_odd, d_even })
}

/// `sum of weighted slacks` for the given half; nonpositive on states
/// produced by the chain. Temperature independent.
fn slack_sum(state: &ChainState, problem: &OtProblem, half: Half) -> f64 {
    let p = &problem.p.weights;
    let q = &problem.q.weights;
    match half {
        Half::ColUpdate => {
            let mut total = 0.0;
            for j in 0..problem.cols() {
                let best = (0..problem.rows())
                    .map(|i| state.upper[i] - problem.cost[(i, j)])
                    .fold(f64::NEG_INFINITY, f64::max);
                total += q[j] * (state.lower[j] - best);
            }
            total
        }
        Half::RowUpdate => {
            let mut total = 0.0;
            for i in 0..problem.rows() {
                let best = (0..problem.cols())
                    .map(|j| problem.cost[(i, j)] + state.lower[j])
                    .fold(f64::INFINITY, f64::min);
                total += p[i] * (best - state.upper[i]);
            }
            total
        }
    }
}

fn bound_coefficient(state: &ChainState, problem: &OtProblem, temp: f64, half: Half) -> Result<f64> {
    let p = &problem.p.weights;
    let q = &problem.q.weights;
    match half {
        Half::ColUpdate => {
            let mut c = 0.0;
            for j in 0..problem.cols() {
                let col = problem.cost.column(j);
                c += q[j] * compute_phi(&state.upper, &col, p, temp)?.0;
            }
            Ok(c)
        }
        Half::RowUpdate => {
            let mut c = 0.0;
            for i in 0..problem.rows() {
                c += p[i] * compute_psi(&state.lower, problem.cost.row(i), q, temp)?.0;
            }
            Ok(c)
        }
    }
}

/// Conditional mean change of the surrogate energy over the next transition
/// of kind `half`, were its noise drawn at temperature `temp`:
/// `slack_sum + temp * C(temp)`. Strictly increasing in `temp`.
pub fn expected_drift(
    state: &ChainState,
    problem: &OtProblem,
    temp: f64,
    half: Half,
) -> Result<f64> {
    if temp <= 0.0 || !temp.is_finite() {
        return Err(Error::InvalidParameter(format!("temperature {temp} must be positive")));
    }
    Ok(slack_sum(state, problem, half) + temp * bound_coefficient(state, problem, temp, half)?)
}

/// The temperature at which [`expected_drift`] vanishes, clamped to zero
/// when the state has no slack. Because `phi`/`psi` themselves depend on the
/// temperature this is a fixed point; it is bracketed by doubling and then
/// bisected to near machine precision.
pub fn critical_temperature(state: &ChainState, problem: &OtProblem, half: Half) -> Result<f64> {
    let slack = slack_sum(state, problem, half);
    if slack >= 0.0 {
        return Ok(0.0);
    }
    // At large temp the coefficient tends to 1, so the root is near -slack.
    let mut hi = (-slack).max(1e-12);
    let mut doublings = 0;
    while expected_drift(state, problem, hi, half)? <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::InvalidParameter(
                "critical temperature bracket did not close".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if expected_drift(state, problem, mid, half)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One recorded transition of the residual martingale.
#[derive(Clone, Copy, Debug)]
pub struct ResidualStep {
    /// index of the state just reached (so the transition was `n-1 -> n`)
    pub n: u64,
    /// conditional drift of the transition
    pub drift: f64,
    /// surrogate energy after the transition
    pub v: f64,
    /// residual after the transition
    pub r: f64,
    /// bound coefficient `C` of the transition at its temperature
    pub c_bound: f64,
    /// regret term `D` of the transition
    pub d_bound: f64,
}

/// Tracks `r(n) = V(z(n)) - sum_{s<n} drift(s)` across half-steps.
///
/// Call [`ResidualTracker::update`] once per half-step, in execution order,
/// passing the temperature that drove the transition: that is the
/// temperature at which the *previous* half-step drew its potentials, since
/// the envelope refresh at the start of a half-step consumes that noise. On
/// a fresh chain the very first column half-step refreshes nothing (the
/// initial envelopes already equal it) and must not be recorded; `begin`
/// arranges the order check so that recording starts at the first row
/// half-step.
#[derive(Clone, Debug)]
pub struct ResidualTracker {
    r: f64,
    n: u64,
    drift_sum: f64,
    expected_half_steps: u64,
    prev_upper: Vec<f64>,
    prev_lower: Vec<f64>,
}

impl ResidualTracker {
    pub fn begin(state: &ChainState, problem: &OtProblem) -> Self {
        let skip_first_col = if state.half_steps == 0 { 1 } else { 0 };
        ResidualTracker {
            r: state.envelope_energy(problem),
            n: 1,
            drift_sum: 0.0,
            expected_half_steps: state.half_steps + 1 + skip_first_col,
            prev_upper: state.upper.clone(),
            prev_lower: state.lower.clone(),
        }
    }

    /// Residual `r(n)` at the current index.
    pub fn residual(&self) -> f64 {
        self.r
    }

    pub fn step_index(&self) -> u64 {
        self.n
    }

    /// Records the transition completed by the half-step that produced
    /// `state`, of kind `half`, driven by noise drawn at `temp`.
    pub fn update(
        &mut self,
        state: &ChainState,
        problem: &OtProblem,
        temp: f64,
        half: Half,
    ) -> Result<ResidualStep> {
        if state.half_steps != self.expected_half_steps {
            return Err(Error::OutOfOrder {
                expected: self.expected_half_steps,
                got: state.half_steps,
            });
        }
        let snapshot = ChainState {
            upper: self.prev_upper.clone(),
            lower: self.prev_lower.clone(),
            ..state.clone()
        };
        let drift = expected_drift(&snapshot, problem, temp, half)?;
        let c_bound = bound_coefficient(&snapshot, problem, temp, half)?;
        let d_bound = {
            let p = &problem.p.weights;
            let q = &problem.q.weights;
            match half {
                Half::RowUpdate => (0..problem.rows())
                    .map(|i| {
                        let x: Vec<f64> = (0..problem.cols())
                            .map(|j| problem.cost[(i, j)] + snapshot.lower[j])
                            .collect();
                        p[i] * regret(&x, q)
                    })
                    .sum(),
                Half::ColUpdate => (0..problem.cols())
                    .map(|j| {
                        let x: Vec<f64> = (0..problem.rows())
                            .map(|i| problem.cost[(i, j)] - snapshot.upper[i])
                            .collect();
                        q[j] * regret(&x, p)
                    })
                    .sum(),
            }
        };
        let v = state.envelope_energy(problem);
        self.n += 1;
        self.drift_sum += drift;
        self.r = v - self.drift_sum;
        self.expected_half_steps += 1;
        self.prev_upper.clone_from(&state.upper);
        self.prev_lower.clone_from(&state.lower);
        Ok(ResidualStep { n: self.n, drift, v, r: self.r, c_bound, d_bound })
    }
}

/// Inputs of the concentration-bound evaluation: the prescribed step bounds
/// `a`, the deviation `k`, the right-bound scale `gamma` and the tail budget
/// `epsilon`.
#[derive(Clone, Debug)]
pub struct BoundQuery {
    pub a: Vec<f64>,
    pub k: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

/// Statistics of one recorded transition fed into [`evaluate_bounds`].
#[derive(Clone, Copy, Debug)]
pub struct BoundStep {
    pub temp: f64,
    pub c_bound: f64,
    pub d_bound: f64,
}

/// Output of [`evaluate_bounds`]; `*_raw` values may exceed 1, the clamped
/// companions are capped for display.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub left_prob_raw: f64,
    pub right_prob_raw: f64,
    pub left_prob: f64,
    pub right_prob: f64,
    /// per step: `C * T <= a_n`
    pub cond_temperature: Vec<bool>,
    /// per step: `log(2N max(m1, m2) / eps) * T + D <= gamma * a_n`
    pub cond_regret: Vec<bool>,
}

/// Tail bounds on the residual after `2N` states:
/// `Pr(r(2N) < r(1) - K) <= exp[-K^2 / (2 sum a_n^2)]` and
/// `Pr(r(2N) > r(1) + gamma K) <= exp[-K^2 / (2 sum a_n^2)] + epsilon`,
/// together with the per-step schedule conditions backing each bound.
pub fn evaluate_bounds(
    query: &BoundQuery,
    steps: &[BoundStep],
    m_max: usize,
) -> Result<BoundReport> {
    if !(query.epsilon > 0.0 && query.epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {} outside (0, 1)",
            query.epsilon
        )));
    }
    if query.k <= 0.0 {
        return Err(Error::InvalidParameter(format!("K {} must be positive", query.k)));
    }
    if query.a.len() != steps.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} step bounds for {} steps",
            query.a.len(),
            steps.len()
        )));
    }
    if query.a.iter().any(|&a| a < 0.0) {
        return Err(Error::InvalidParameter("step bounds must be nonnegative".into()));
    }
    let two_n = steps.len() as f64 + 1.0;
    let log_term = (two_n * m_max as f64 / query.epsilon).ln();
    let mut cond_temperature = Vec::with_capacity(steps.len());
    let mut cond_regret = Vec::with_capacity(steps.len());
    for (step, &a) in steps.iter().zip(&query.a) {
        cond_temperature.push(step.c_bound * step.temp <= a);
        cond_regret.push(log_term * step.temp + step.d_bound <= query.gamma * a);
    }
    let denom: f64 = 2.0 * query.a.iter().map(|a| a * a).sum::<f64>();
    let left = (-query.k * query.k / denom).exp();
    let right = left + query.epsilon;
    Ok(BoundReport {
        left_prob_raw: left,
        right_prob_raw: right,
        left_prob: left.min(1.0),
        right_prob: right.min(1.0),
        cond_temperature,
        cond_regret,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostMatrix;
    use crate::measure::make_measure;
    use crate::sampler::init_chain;

    #[test]
    fn max_exp_single_reversed_unit_exponential() {
        let spec = MaxExpSpec::new(vec![0.0], vec![1.0]).unwrap();
        assert!((max_exp_expectation(&spec) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_exp_two_tied_endpoints() {
        // max of two reversed Exp(1) at 0 = -(min of two Exp(1)) = -Exp(2).
        let spec = MaxExpSpec::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!((max_exp_expectation(&spec) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn max_exp_separated_endpoints() {
        // endpoints 1 and 0, unit rates: mean is exp(-1)/2.
        let spec = MaxExpSpec::new(vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        let want = (-1.0f64).exp() / 2.0;
        assert!((max_exp_expectation(&spec) - want).abs() < 1e-15);
    }

    #[test]
    fn max_exp_sorting_is_internal() {
        let a = MaxExpSpec::new(vec![0.0, 1.0], vec![2.0, 1.0]).unwrap();
        let b = MaxExpSpec::new(vec![1.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(max_exp_expectation(&a), max_exp_expectation(&b));
    }

    #[test]
    fn max_exp_rejects_bad_specs() {
        assert!(MaxExpSpec::new(vec![], vec![]).is_err());
        assert!(MaxExpSpec::new(vec![0.0], vec![0.0]).is_err());
        assert!(MaxExpSpec::new(vec![0.0], vec![-1.0]).is_err());
    }

    #[test]
    fn phi_single_row_is_inverse_weight() {
        let (phi, idx) = compute_phi(&[0.4], &[0.1], &[0.25], 0.7).unwrap();
        assert!((phi - 4.0).abs() < 1e-12);
        assert_eq!(idx, 0);
    }

    #[test]
    fn phi_equal_endpoints_sum_weights() {
        // two rows with equal endpoints and p = [0.5, 0.5]: phi = 1/(p1+p2) = 1
        // (endpoints 0.5 - 0.25 and 1.0 - 0.75 are exactly representable)
        let (phi, idx) = compute_phi(&[0.5, 1.0], &[0.25, 0.75], &[0.5, 0.5], 0.2).unwrap();
        assert!((phi - 1.0).abs() < 1e-12);
        assert_eq!(idx, 0, "ties break to the lowest index");
    }

    #[test]
    fn psi_single_column_is_inverse_weight() {
        let (psi, idx) = compute_psi(&[-0.2], &[0.5], &[0.4], 1.3).unwrap();
        assert!((psi - 2.5).abs() < 1e-12);
        assert_eq!(idx, 0);
    }

    #[test]
    fn phi_psi_agree_with_the_max_exp_oracle() {
        // phi through the generic expectation: endpoints upper - cost,
        // rates p/T, then phi = (top - mean) / T. Same mapping, two paths.
        let upper = [0.9, 0.1, 0.55, 0.3];
        let col = [0.2, 0.05, 0.4, 0.3];
        let p = [0.1, 0.2, 0.3, 0.4];
        let temp = 0.17;
        let endpoints: Vec<f64> = (0..4).map(|i| upper[i] - col[i]).collect();
        let rates: Vec<f64> = p.iter().map(|&w| w / temp).collect();
        let spec = MaxExpSpec::new(endpoints.clone(), rates).unwrap();
        let top = endpoints.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let oracle = (top - max_exp_expectation(&spec)) / temp;
        let (phi, _) = compute_phi(&upper, &col, &p, temp).unwrap();
        assert!((phi - oracle).abs() <= 1e-12 * phi.abs().max(1.0), "{phi} vs {oracle}");

        // psi through the oracle on negated endpoints.
        let lower = [-0.3, 0.2, 0.05];
        let row = [0.6, 0.15, 0.33];
        let q = [0.5, 0.25, 0.25];
        let endpoints: Vec<f64> = (0..3).map(|j| -(row[j] + lower[j])).collect();
        let rates: Vec<f64> = q.iter().map(|&w| w / temp).collect();
        let spec = MaxExpSpec::new(endpoints.clone(), rates).unwrap();
        let top = endpoints.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let oracle = (top - max_exp_expectation(&spec)) / temp;
        let (psi, _) = compute_psi(&lower, &row, &q, temp).unwrap();
        assert!((psi - oracle).abs() <= 1e-12 * psi.abs().max(1.0), "{psi} vs {oracle}");
    }

    #[test]
    fn regret_examples() {
        assert_eq!(regret(&[3.0, 3.0], &[0.5, 0.5]), 0.0);
        assert_eq!(regret(&[1.0, 0.0], &[0.5, 0.5]), 0.5);
        assert!(regret(&[0.9, 0.4, 0.7], &[0.2, 0.5, 0.3]) >= 0.0);
    }

    fn small_state() -> (DiscreteMeasureHolder, ChainState) {
        let p = make_measure(vec![0.3, 0.7], None).unwrap();
        let q = make_measure(vec![0.6, 0.4], None).unwrap();
        let m = CostMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let holder = DiscreteMeasureHolder { p, q, m };
        let state = {
            let problem = holder.problem();
            let mut s = init_chain(&problem, 13);
            for _ in 0..4 {
                s.sweep(&problem, 0.3, 0.3);
            }
            s
        };
        (holder, state)
    }

    struct DiscreteMeasureHolder {
        p: crate::measure::DiscreteMeasure,
        q: crate::measure::DiscreteMeasure,
        m: CostMatrix,
    }

    impl DiscreteMeasureHolder {
        fn problem(&self) -> OtProblem<'_> {
            OtProblem::new(&self.p, &self.q, &self.m).unwrap()
        }
    }

    #[test]
    fn drift_vanishes_at_the_critical_temperature() {
        let (holder, state) = small_state();
        let problem = holder.problem();
        for half in [Half::RowUpdate, Half::ColUpdate] {
            let tc = critical_temperature(&state, &problem, half).unwrap();
            assert!(tc > 0.0);
            let drift = expected_drift(&state, &problem, tc, half).unwrap();
            assert!(drift.abs() < 1e-12, "drift {drift} at T = {tc}");
        }
    }

    #[test]
    fn expected_drift_matches_resampled_energy_changes() {
        // resample the pending column transition: fresh row potentials at
        // `temp`, deterministic column refresh, then compare the mean energy
        // change against the closed-form drift
        let (holder, state) = small_state();
        let problem = holder.problem();
        let temp = 0.25;
        let key = crate::rng::RngKey::new(4321, 0);
        let reps = 10_000u64;
        let v0 = state.envelope_energy(&problem);
        let p = &problem.p.weights;
        let q = &problem.q.weights;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for rep in 0..reps {
            let g: Vec<f64> = (0..2)
                .map(|i| state.upper[i] - key.exp1(rep, i as u64) * temp / p[i])
                .collect();
            let mut v = p.iter().zip(&state.upper).map(|(w, u)| w * u).sum::<f64>();
            for j in 0..2 {
                let refreshed = (0..2)
                    .map(|i| g[i] - problem.cost[(i, j)])
                    .fold(f64::NEG_INFINITY, f64::max);
                v -= q[j] * refreshed;
            }
            let dv = v - v0;
            sum += dv;
            sq += dv * dv;
        }
        let n = reps as f64;
        let mean = sum / n;
        let se = (((sq - n * mean * mean) / (n - 1.0)) / n).sqrt();
        let drift = expected_drift(&state, &problem, temp, Half::ColUpdate).unwrap();
        assert!(
            (mean - drift).abs() <= 3.0 * se,
            "MC mean {mean:.5} vs drift {drift:.5} (SE {se:.6})"
        );
    }

    #[test]
    fn drift_is_increasing_in_temperature() {
        let (holder, state) = small_state();
        let problem = holder.problem();
        let d1 = expected_drift(&state, &problem, 0.1, Half::ColUpdate).unwrap();
        let d2 = expected_drift(&state, &problem, 0.2, Half::ColUpdate).unwrap();
        let d3 = expected_drift(&state, &problem, 0.4, Half::ColUpdate).unwrap();
        assert!(d1 < d2 && d2 < d3);
    }

    #[test]
    fn one_by_one_critical_temperature_unrolled() {
        // After a column half-step with theta = 1 at T0 = 0.1 (q = [1]) and
        // the deterministic row refresh, the column-side slack is exactly
        // -0.1 and phi = 1/p = 1, so the critical temperature is 0.1.
        let p = make_measure(vec![1.0], None).unwrap();
        let m = CostMatrix::from_rows(vec![vec![0.7]]).unwrap();
        let problem = OtProblem::new(&p, &p, &m).unwrap();
        let mut state = init_chain(&problem, 0);
        state.half_step_cols_with_draws(&problem, 0.1, &[1.0]);
        state.half_step_rows_with_draws(&problem, 1.0, &[0.4]);
        let tc = critical_temperature(&state, &problem, Half::ColUpdate).unwrap();
        assert!((tc - 0.1).abs() < 1e-10, "critical temperature {tc}");
    }

    #[test]
    fn zero_slack_state_has_zero_critical_temperature() {
        let p = make_measure(vec![1.0, 1.0], None).unwrap();
        let m = CostMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let problem = OtProblem::new(&p, &p, &m).unwrap();
        let state = init_chain(&problem, 0);
        // fresh state: lower equals the refreshed envelope, slack is zero
        assert_eq!(critical_temperature(&state, &problem, Half::ColUpdate).unwrap(), 0.0);
        // with no slack the drift is the pure noise term <phi, q> * T
        for temp in [0.1, 0.7] {
            let stats = concentration_ingredients(&state, &problem, temp).unwrap();
            let drift = expected_drift(&state, &problem, temp, Half::ColUpdate).unwrap();
            assert!((drift - stats.c_even * temp).abs() < 1e-14);
            assert!(drift > 0.0);
        }
    }

    #[test]
    fn one_by_one_concentration_ingredients() {
        let p = make_measure(vec![1.0], None).unwrap();
        let m = CostMatrix::from_rows(vec![vec![0.4]]).unwrap();
        let problem = OtProblem::new(&p, &p, &m).unwrap();
        let state = init_chain(&problem, 0);
        let stats = concentration_ingredients(&state, &problem, 0.2).unwrap();
        assert!((stats.c_odd - 1.0).abs() < 1e-12);
        assert!((stats.c_even - 1.0).abs() < 1e-12);
        assert_eq!(stats.d_odd, 0.0);
        assert_eq!(stats.d_even, 0.0);
    }

    #[test]
    fn residual_starts_at_the_current_energy_and_checks_order() {
        let (holder, _) = small_state();
        let problem = holder.problem();
        let mut state = init_chain(&problem, 3);
        let mut tracker = ResidualTracker::begin(&state, &problem);
        assert_eq!(tracker.residual(), state.envelope_energy(&problem));
        assert_eq!(tracker.step_index(), 1);
        // the first column half-step of a fresh chain must not be recorded
        state.half_step_cols(&problem, 0.2);
        assert!(matches!(
            tracker.update(&state, &problem, 0.2, Half::ColUpdate),
            Err(Error::OutOfOrder { .. })
        ));
        state.half_step_rows(&problem, 0.2);
        let step = tracker.update(&state, &problem, 0.2, Half::RowUpdate).unwrap();
        assert_eq!(step.n, 2);
        assert!((step.r - (step.v - step.drift)).abs() < 1e-15);
    }

    #[test]
    fn deterministic_pseudo_draw_residual_is_reproducible() {
        let (holder, _) = small_state();
        let problem = holder.problem();
        let run = || {
            let mut state = init_chain(&problem, 0);
            let mut tracker = ResidualTracker::begin(&state, &problem);
            state.half_step_cols_with_draws(&problem, 0.2, &[1.0, 1.0]);
            state.half_step_rows_with_draws(&problem, 0.2, &[1.0, 1.0]);
            let mut rs = vec![tracker.update(&state, &problem, 0.2, Half::RowUpdate).unwrap().r];
            for _ in 0..5 {
                state.half_step_cols_with_draws(&problem, 0.2, &[1.0, 1.0]);
                rs.push(tracker.update(&state, &problem, 0.2, Half::ColUpdate).unwrap().r);
                state.half_step_rows_with_draws(&problem, 0.2, &[1.0, 1.0]);
                rs.push(tracker.update(&state, &problem, 0.2, Half::RowUpdate).unwrap().r);
            }
            rs
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.is_finite()));
    }

    #[test]
    fn bound_formula_examples() {
        let query = BoundQuery { a: vec![1.0], k: 1.0, gamma: 1.0, epsilon: 0.5 };
        let steps = [BoundStep { temp: 0.1, c_bound: 1.0, d_bound: 0.0 }];
        let report = evaluate_bounds(&query, &steps, 2).unwrap();
        assert!((report.left_prob_raw - (-0.5f64).exp()).abs() < 1e-12);
        assert!((report.right_prob_raw - ((-0.5f64).exp() + 0.5)).abs() < 1e-12);
        assert_eq!(report.right_prob, 1.0, "clamped for display");
        assert!(report.cond_temperature[0]);

        let huge = BoundQuery { a: vec![1.0], k: 1e6, gamma: 1.0, epsilon: 0.5 };
        let report = evaluate_bounds(&huge, &steps, 2).unwrap();
        assert_eq!(report.left_prob_raw, 0.0);
    }

    #[test]
    fn bound_query_validation() {
        let steps = [BoundStep { temp: 0.1, c_bound: 1.0, d_bound: 0.0 }];
        let bad_eps = BoundQuery { a: vec![1.0], k: 1.0, gamma: 1.0, epsilon: 1.5 };
        assert!(evaluate_bounds(&bad_eps, &steps, 2).is_err());
        let bad_k = BoundQuery { a: vec![1.0], k: 0.0, gamma: 1.0, epsilon: 0.5 };
        assert!(evaluate_bounds(&bad_k, &steps, 2).is_err());
        let bad_len = BoundQuery { a: vec![1.0, 1.0], k: 1.0, gamma: 1.0, epsilon: 0.5 };
        assert!(evaluate_bounds(&bad_len, &steps, 2).is_err());
    }
}
