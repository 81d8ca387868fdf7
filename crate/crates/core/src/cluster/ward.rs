use super::{check_k, sq_dist, ClusterAlgorithm, ClusterAssignment, ClusterError};
use ndarray::Array2;

/// One agglomeration step: slot `into` absorbs slot `from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WardMerge {
    pub into: usize,
    pub from: usize,
    /// Increase in within-cluster sum of squares caused by the merge.
    pub cost: f64,
}

/// Full Ward merge sequence (`n - 1` steps) via the Lance-Williams update.
///
/// `D[a][b] = 2·n_a·n_b/(n_a+n_b)·‖c_a − c_b‖²`, twice the Ward increase,
/// starts as the squared Euclidean distance. The minimum pair is merged,
/// ties going to the smallest `(i, j)`, and the result keeps slot `i`.
pub fn ward_merges(x: &Array2<f64>) -> Vec<WardMerge> {
    let n = x.nrows();
    let mut dist = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let d = sq_dist(x.row(i), x.row(j));
            dist[[i, j]] = d;
            dist[[j, i]] = d;
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if active[j] && dist[[i, j]] < best.2 {
                    best = (i, j, dist[[i, j]]);
                }
            }
        }
        let (i, j, dij) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let nk = size[k] as f64;
            let updated = ((ni + nk) * dist[[i, k]] + (nj + nk) * dist[[j, k]] - nk * dij) / (ni + nj + nk);
            dist[[i, k]] = updated;
            dist[[k, i]] = updated;
        }
        size[i] += size[j];
        active[j] = false;
        merges.push(WardMerge {
            into: i,
            from: j,
            cost: dij / 2.0,
        });
    }
    merges
}

/// Labels after replaying merges until `k` clusters remain.
pub(crate) fn cut(n: usize, merges: &[WardMerge], k: usize) -> Vec<i64> {
    let mut owner: Vec<usize> = (0..n).collect();
    for m in merges.iter().take(n - k) {
        for o in owner.iter_mut() {
            if *o == m.from {
                *o = m.into;
            }
        }
    }
    owner.into_iter().map(|o| o as i64).collect()
}

/// Bottom-up Ward clustering stopped at `k` clusters.
pub fn agglomerative_ward(x: &Array2<f64>, k: usize) -> Result<ClusterAssignment, ClusterError> {
    let n = x.nrows();
    check_k(k, n)?;
    let merges = ward_merges(x);
    let raw = cut(n, &merges, k);
    Ok(ClusterAssignment::from_raw(&raw, ClusterAlgorithm::AgglomerativeWard, None, Vec::new()))
}
