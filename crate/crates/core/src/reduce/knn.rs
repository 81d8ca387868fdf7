use super::{DistanceMetric, ReduceError};
use crate::exec::Execution;
use ndarray::Array2;

/// Exact k nearest neighbours plus the per-node smoothing quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    pub k: usize,
    /// `n × k`, self excluded, ordered by (distance, index).
    pub indices: Array2<usize>,
    pub distances: Array2<f64>,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl NeighborGraph {
    pub fn n(&self) -> usize {
        self.indices.nrows()
    }

    /// Directed membership strength of the `slot`-th neighbour of `i`.
    pub fn membership(&self, i: usize, slot: usize) -> f64 {
        (-(self.distances[[i, slot]] - self.rho[i]).max(0.0) / self.sigma[i]).exp()
    }
}

fn row_distance(x: &Array2<f64>, norms: &[f64], metric: DistanceMetric, i: usize, j: usize) -> f64 {
    let a = x.row(i);
    let b = x.row(j);
    match metric {
        DistanceMetric::Euclidean => a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt(),
        DistanceMetric::Cosine => {
            let denom = norms[i] * norms[j];
            if denom == 0.0 {
                // a zero vector is equally unrelated to everything
                return if norms[i] == norms[j] { 0.0 } else { 1.0 };
            }
            let dot: f64 = a.iter().zip(b.iter()).map(|(p, q)| p * q).sum();
            (1.0 - dot / denom).max(0.0)
        }
    }
}

/// Dense `n × n` distance matrix, rows computed through `exec`.
pub fn pairwise_distances(x: &Array2<f64>, metric: DistanceMetric, exec: Execution) -> Array2<f64> {
    let n = x.nrows();
    let norms: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    let rows = exec.map_range(n, |i| (0..n).map(|j| if i == j { 0.0 } else { row_distance(x, &norms, metric, i, j) }).collect::<Vec<f64>>());
    let mut out = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    // exact symmetry regardless of float evaluation order
    for i in 0..n {
        for j in i + 1..n {
            let v = out[[i, j]].min(out[[j, i]]);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

const SIGMA_TOL: f64 = 1e-5;
const SIGMA_ITERS: usize = 200;

/// Binary search for sigma with `Σ exp(−max(0, d − rho)/sigma) = log2(k)`.
/// When the target is unreachable (it lies below the count of neighbours at
/// distance rho) the sum can only approach it from above, and sigma ends up
/// at the smallest bracket value; a floor keeps it positive.
fn solve_sigma(dists: &[f64], rho: f64, target: f64) -> f64 {
    let mean = dists.iter().sum::<f64>() / dists.len() as f64;
    let sum_at = |sigma: f64| dists.iter().map(|d| (-(d - rho).max(0.0) / sigma).exp()).sum::<f64>();
    let (mut lo, mut hi, mut mid) = (0.0f64, f64::INFINITY, 1.0f64);
    for _ in 0..SIGMA_ITERS {
        let s = sum_at(mid);
        if (s - target).abs() < SIGMA_TOL {
            break;
        }
        if s > target {
            hi = mid;
            mid = (lo + hi) / 2.0;
        } else {
            lo = mid;
            mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
        }
    }
    let floor = if mean > 0.0 { 1e-3 * mean } else { 1.0 };
    if (sum_at(mid) - target).abs() < SIGMA_TOL && mid > 0.0 {
        mid
    } else {
        mid.max(floor)
    }
}

/// Brute-force k-NN. Duplicate points are allowed and yield `rho = 0`.
pub fn knn_graph(x: &Array2<f64>, k: usize, metric: DistanceMetric, exec: Execution) -> Result<NeighborGraph, ReduceError> {
    let n = x.nrows();
    if k == 0 || k >= n {
        return Err(ReduceError::InvalidParams(format!("k={k} needs 1 <= k < n={n}")));
    }
    let dist = pairwise_distances(x, metric, exec);
    knn_from_distances(&dist, k, exec)
}

pub(crate) fn knn_from_distances(dist: &Array2<f64>, k: usize, exec: Execution) -> Result<NeighborGraph, ReduceError> {
    let n = dist.nrows();
    if k == 0 || k >= n {
        return Err(ReduceError::InvalidParams(format!("k={k} needs 1 <= k < n={n}")));
    }
    let target = (k as f64).log2();
    let rows = exec.map_range(n, |i| {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| dist[[i, a]].total_cmp(&dist[[i, b]]).then(a.cmp(&b)));
        order.truncate(k);
        let ds: Vec<f64> = order.iter().map(|&j| dist[[i, j]]).collect();
        let rho = ds[0];
        let sigma = solve_sigma(&ds, rho, target);
        (order, ds, rho, sigma)
    });
    let mut indices = Array2::zeros((n, k));
    let mut distances = Array2::zeros((n, k));
    let mut rho = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for (i, (idx, ds, r, s)) in rows.into_iter().enumerate() {
        for slot in 0..k {
            indices[[i, slot]] = idx[slot];
            distances[[i, slot]] = ds[slot];
        }
        rho.push(r);
        sigma.push(s);
    }
    Ok(NeighborGraph {
        k,
        indices,
        distances,
        rho,
        sigma,
    })
}

/// Symmetric sparse weights; row lists are sorted by column and never
/// contain the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyGraph {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl FuzzyGraph {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|p| self.rows[i][p].1)
            .unwrap_or(0.0)
    }

    /// Every stored entry `(i, j, w)` in row-major order (both directions).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, w)| (i, j, w)))
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, w)| w).sum()
    }

    /// Connected components over positive-weight edges.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &(v, w) in &self.rows[u] {
                    if w > 0.0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }
}

/// Probabilistic t-conorm `A + Aᵀ − A∘Aᵀ` over directed memberships.
pub fn fuzzy_union(g: &NeighborGraph) -> FuzzyGraph {
    let n = g.n();
    let mut directed: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
    for i in 0..n {
        for slot in 0..g.k {
            let j = g.indices[[i, slot]];
            if j != i {
                directed[i].insert(j, g.membership(i, slot));
            }
        }
    }
    let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
    for i in 0..n {
        for (&j, &a) in &directed[i] {
            let b = directed[j].get(&i).copied().unwrap_or(0.0);
            let w = (a + b - a * b).clamp(0.0, 1.0);
            rows[i].insert(j, w);
            rows[j].insert(i, w);
        }
    }
    FuzzyGraph {
        n,
        rows: rows.into_iter().map(|r| r.into_iter().filter(|&(_, w)| w > 0.0).collect()).collect(),
    }
}
