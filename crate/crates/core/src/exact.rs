//! Exact transportation LP solver.
//!
//! Transportation simplex (the network-simplex specialization for bipartite
//! transportation problems). Basic feasible solutions are spanning trees of
//! the bipartite supply/demand graph; pivots move flow around the unique
//! cycle closed by an entering cell. Bland's rule (lowest-index entering
//! cell among negative reduced costs, lowest-index leaving cell among ratio
//! ties) prevents cycling on degenerate bases; the index-ordered tie break
//! is the operational form of a lexicographic perturbation.

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::plan::{PlanSource, TransportPlan};

/// Optimal cost, an optimal vertex plan, and dual potentials satisfying
/// `dual_g[i] - dual_h[j] <= M[i][j]` with strong duality.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub cost: f64,
    pub plan: TransportPlan,
    pub dual_g: Vec<f64>,
    pub dual_h: Vec<f64>,
}

const REDUCED_COST_TOL: f64 = 1e-12;

struct Simplex<'a> {
    m1: usize,
    m2: usize,
    cost: &'a CostMatrix,
    /// flow[i * m2 + j] for basic cells, 0 elsewhere
    flow: Vec<f64>,
    basic: Vec<bool>,
    /// adjacency over the basis tree; nodes 0..m1 are rows, m1..m1+m2 cols
    adj: Vec<Vec<usize>>,
}

impl<'a> Simplex<'a> {
    fn new(p: &[f64], q: &[f64], cost: &'a CostMatrix) -> Self {
        let (m1, m2) = (p.len(), q.len());
        let mut s = Simplex {
            m1,
            m2,
            cost,
            flow: vec![0.0; m1 * m2],
            basic: vec![false; m1 * m2],
            adj: vec![Vec::new(); m1 + m2],
        };
        s.northwest_corner(p, q);
        s
    }

    fn cell(&self, i: usize, j: usize) -> usize {
        i * self.m2 + j
    }

    fn add_basic(&mut self, i: usize, j: usize) {
        let c = self.cell(i, j);
        self.basic[c] = true;
        self.adj[i].push(self.m1 + j);
        self.adj[self.m1 + j].push(i);
    }

    fn remove_basic(&mut self, i: usize, j: usize) {
        let c = self.cell(i, j);
        self.basic[c] = false;
        self.adj[i].retain(|&n| n != self.m1 + j);
        self.adj[self.m1 + j].retain(|&n| n != i);
    }

    /// Staircase initial basis: always m1 + m2 - 1 cells forming a tree,
    /// zero-flow cells included on degenerate ties.
    fn northwest_corner(&mut self, p: &[f64], q: &[f64]) {
        let mut a = p.to_vec();
        let mut b = q.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let f = a[i].min(b[j]);
            let c = self.cell(i, j);
            self.flow[c] = f;
            self.add_basic(i, j);
            a[i] -= f;
            b[j] -= f;
            if i == self.m1 - 1 && j == self.m2 - 1 {
                break;
            }
            if a[i] <= b[j] && i < self.m1 - 1 {
                i += 1;
            } else if j < self.m2 - 1 {
                j += 1;
            } else {
                i += 1;
            }
        }
        // Re-derive flows from the tree by leaf elimination so marginals
        // hold to machine precision rather than accumulated subtraction error.
        self.recompute_flows(p, q);
    }

    fn recompute_flows(&mut self, p: &[f64], q: &[f64]) {
        let n = self.m1 + self.m2;
        let mut residual: Vec<f64> = p.iter().chain(q.iter()).copied().collect();
        let mut degree: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let mut arcs: Vec<Vec<usize>> = self.adj.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        let mut seen = vec![false; n];
        while let Some(v) = stack.pop() {
            if seen[v] || degree[v] == 0 {
                continue;
            }
            seen[v] = true;
            let Some(&u) = arcs[v].iter().find(|&&u| !seen[u]) else { continue };
            let (i, j) = if v < self.m1 { (v, u - self.m1) } else { (u, v - self.m1) };
            let c = self.cell(i, j);
            self.flow[c] = residual[v].max(0.0);
            residual[u] -= residual[v];
            residual[v] = 0.0;
            degree[u] -= 1;
            degree[v] -= 1;
            arcs[u].retain(|&w| w != v);
            if degree[u] == 1 {
                stack.push(u);
            }
        }
    }

    /// Solve `u_i + v_j = c_ij` over the basis tree, rooted at row 0 with u_0 = 0.
    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.m1 + self.m2;
        let mut u = vec![0.0; self.m1];
        let mut v = vec![0.0; self.m2];
        let mut visited = vec![false; n];
        let mut queue = vec![0usize];
        visited[0] = true;
        while let Some(node) = queue.pop() {
            for &next in &self.adj[node] {
                if visited[next] {
                    continue;
                }
                visited[next] = true;
                if node < self.m1 {
                    let (i, j) = (node, next - self.m1);
                    v[j] = self.cost[(i, j)] - u[i];
                } else {
                    let (i, j) = (next, node - self.m1);
                    u[i] = self.cost[(i, j)] - v[j];
                }
                queue.push(next);
            }
        }
        (u, v)
    }

    /// Lowest-index cell (row-major) with reduced cost below -tol.
    fn entering(&self, u: &[f64], v: &[f64]) -> Option<(usize, usize)> {
        for i in 0..self.m1 {
            for j in 0..self.m2 {
                if !self.basic[self.cell(i, j)]
                    && self.cost[(i, j)] - u[i] - v[j] < -REDUCED_COST_TOL
                {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Tree path between the entering cell's endpoints; returns the cells of
    /// the induced cycle excluding the entering cell, alternating -,+,-,...
    fn cycle_path(&self, from: usize, to: usize) -> Vec<(usize, usize)> {
        let n = self.m1 + self.m2;
        let mut parent = vec![usize::MAX; n];
        parent[from] = from;
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for &next in &self.adj[node] {
                if parent[next] == usize::MAX {
                    parent[next] = node;
                    queue.push_back(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = to;
        while node != from {
            let prev = parent[node];
            let (i, j) = if node < self.m1 { (node, prev - self.m1) } else { (prev, node - self.m1) };
            cells.push((i, j));
            node = prev;
        }
        cells
    }

    fn pivot(&mut self, enter: (usize, usize)) {
        // Path cells run from the entering row node to its column node; the
        // first one shares the entering row, so signs alternate -,+,-,...
        let path = self.cycle_path(self.m1 + enter.1, enter.0);
        let minus: Vec<(usize, usize)> = path.iter().copied().step_by(2).collect();
        let theta = minus
            .iter()
            .map(|&(i, j)| self.flow[self.cell(i, j)])
            .fold(f64::INFINITY, f64::min);
        let leave = *minus
            .iter()
            .filter(|&&(i, j)| self.flow[self.cell(i, j)] <= theta)
            .min()
            .expect("cycle has a leaving cell");
        for (pos, &(i, j)) in path.iter().enumerate() {
            let c = self.cell(i, j);
            if pos % 2 == 0 {
                self.flow[c] = (self.flow[c] - theta).max(0.0);
            } else {
                self.flow[c] += theta;
            }
        }
        self.remove_basic(leave.0, leave.1);
        let out = self.cell(leave.0, leave.1);
        self.flow[out] = 0.0;
        self.add_basic(enter.0, enter.1);
        let inn = self.cell(enter.0, enter.1);
        self.flow[inn] += theta;
    }
}

/// Solves the transportation LP to optimality.
pub fn solve_exact(
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    cost: &CostMatrix,
) -> Result<ExactSolution> {
    if cost.rows() != p.len() || cost.cols() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "cost {}x{} against marginals {}x{}",
            cost.rows(),
            cost.cols(),
            p.len(),
            q.len()
        )));
    }
    let mut simplex = Simplex::new(&p.weights, &q.weights, cost);
    let pivot_cap = 200 * (p.len() * q.len()) + 10_000;
    let mut pivots = 0usize;
    let (u, v) = loop {
        let (u, v) = simplex.potentials();
        match simplex.entering(&u, &v) {
            None => break (u, v),
            Some(cell) => {
                simplex.pivot(cell);
                pivots += 1;
                if pivots > pivot_cap {
                    return Err(Error::SolverStall(pivot_cap));
                }
            }
        }
    };
    // Re-derive flows from the optimal basis so marginal error does not
    // carry accumulated pivot arithmetic.
    simplex.recompute_flows(&p.weights, &q.weights);
    let plan = TransportPlan::dense(p.len(), q.len(), simplex.flow.clone(), PlanSource::Exact)?;
    let cost_value = plan.transport_cost(cost)?;
    // Dual convention: g_i - h_j <= M_ij with objective <p, g> - <q, h>.
    let dual_h: Vec<f64> = v.iter().map(|&x| -x).collect();
    Ok(ExactSolution { cost: cost_value, plan, dual_g: u, dual_h })
}
