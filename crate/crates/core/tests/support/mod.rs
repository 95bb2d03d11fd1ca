//! Shared helpers for the integration suites: an independent brute-force
//! transportation-LP oracle (basic-feasible-solution enumeration) and small
//! statistics utilities.
#![allow(dead_code)] // each test crate compiles its own copy

use gibbs_ot::cost::CostMatrix;

/// Minimum transport cost by enumerating every basis: all cell subsets of
/// size `m1 + m2 - 1` that form a spanning tree of the bipartite graph,
/// with flows solved by leaf elimination and checked for nonnegativity.
/// Exponential; intended for `m1, m2 <= 4`.
pub fn brute_force_cost(p: &[f64], q: &[f64], cost: &CostMatrix) -> f64 {
    let (m1, m2) = (p.len(), q.len());
    let cells: Vec<(usize, usize)> =
        (0..m1).flat_map(|i| (0..m2).map(move |j| (i, j))).collect();
    let k = m1 + m2 - 1;
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        if let Some(c) = tree_cost(&subset, &cells, p, q, cost) {
            best = best.min(c);
        }
        // next k-combination of 0..cells.len() in lexicographic order
        let n = cells.len();
        let mut idx = k;
        loop {
            if idx == 0 {
                return best;
            }
            idx -= 1;
            if subset[idx] != idx + n - k {
                subset[idx] += 1;
                for later in idx + 1..k {
                    subset[later] = subset[later - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Cost of the basis given by `subset`, or None if it is not a spanning
/// tree with nonnegative flows.
fn tree_cost(
    subset: &[usize],
    cells: &[(usize, usize)],
    p: &[f64],
    q: &[f64],
    cost: &CostMatrix,
) -> Option<f64> {
    let (m1, m2) = (p.len(), q.len());
    let nodes = m1 + m2;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes]; // (neighbor, edge id)
    for (edge, &ci) in subset.iter().enumerate() {
        let (i, j) = cells[ci];
        adj[i].push((m1 + j, edge));
        adj[m1 + j].push((i, edge));
    }
    let mut residual: Vec<f64> = p.iter().chain(q.iter()).copied().collect();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut used = vec![false; subset.len()];
    let mut flows = vec![0.0; subset.len()];
    let mut stack: Vec<usize> = (0..nodes).filter(|&v| degree[v] == 1).collect();
    let mut done = vec![false; nodes];
    let mut eliminated = 0;
    while let Some(v) = stack.pop() {
        if done[v] || degree[v] != 1 {
            continue;
        }
        let &(u, edge) = adj[v].iter().find(|&&(_, e)| !used[e])?;
        used[edge] = true;
        flows[edge] = residual[v];
        if flows[edge] < -1e-12 {
            return None;
        }
        residual[u] -= residual[v];
        residual[v] = 0.0;
        done[v] = true;
        eliminated += 1;
        degree[v] -= 1;
        degree[u] -= 1;
        if degree[u] == 1 {
            stack.push(u);
        }
    }
    // a spanning tree eliminates all but one node
    if eliminated != nodes - 1 {
        return None;
    }
    let total: f64 = subset
        .iter()
        .enumerate()
        .map(|(edge, &ci)| {
            let (i, j) = cells[ci];
            flows[edge].max(0.0) * cost[(i, j)]
        })
        .sum();
    Some(total)
}

/// Sample mean and standard error of a slice.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Streaming mean/SE from precomputed sums.
pub fn mean_and_se_from_sums(sum: f64, sum_sq: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    (mean, (var.max(0.0) / n).sqrt())
}
