//! HDBSCAN: mutual reachability, Prim MST, single-linkage hierarchy,
//! condensed tree and excess-of-mass cluster selection.

use super::{sq_dist, ClusterAlgorithm, ClusterAssignment, ClusterError, NOISE};
use ndarray::Array2;

/// Largest density level; stands in for `1/0` on duplicate points.
const LAMBDA_CAP: f64 = 1e12;

/// `min_cluster_size = max(5, n/50)` and `min_samples = min_cluster_size`.
pub fn hdbscan_defaults(n: usize) -> (usize, usize) {
    let mcs = (n / 50).max(5);
    (mcs, mcs)
}

/// Distance to the `min_samples`-th nearest other point (capped at `n - 1`).
pub fn core_distances(dist: &Array2<f64>, min_samples: usize) -> Vec<f64> {
    let n = dist.nrows();
    let k = min_samples.clamp(1, n.saturating_sub(1).max(1));
    (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[[i, j]]).collect();
            if row.is_empty() {
                return 0.0;
            }
            row.sort_by(f64::total_cmp);
            row[k - 1]
        })
        .collect()
}

/// `max(core_a, core_b, d(a, b))` off the diagonal.
pub fn mutual_reachability(dist: &Array2<f64>, core: &[f64]) -> Array2<f64> {
    let n = dist.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { dist[[i, j]].max(core[i]).max(core[j]) })
}

/// Prim's algorithm on the dense graph; ties pick the smallest vertex.
fn prim_mst(w: &Array2<f64>) -> Vec<(usize, usize, f64)> {
    let n = w.nrows();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for v in 0..n {
            if !in_tree[v] && w[[current, v]] < best[v] {
                best[v] = w[[current, v]];
                parent[v] = current;
            }
        }
        let mut next = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (next == usize::MAX || best[v] < best[next]) {
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, best[next]));
        current = next;
    }
    edges
}

struct Dendrogram {
    /// Internal node `n + t` joins `children[t]` at `heights[t]`.
    children: Vec<(usize, usize)>,
    heights: Vec<f64>,
    sizes: Vec<usize>,
}

fn single_linkage(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Dendrogram {
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.min(a.1).cmp(&b.0.min(b.1))).then(a.0.max(a.1).cmp(&b.0.max(b.1))));
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut sizes = vec![1usize; 2 * n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut children = Vec::with_capacity(n.saturating_sub(1));
    let mut heights = Vec::with_capacity(n.saturating_sub(1));
    for (t, (a, b, d)) in edges.into_iter().enumerate() {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        let node = n + t;
        parent[ra] = node;
        parent[rb] = node;
        sizes[node] = sizes[ra] + sizes[rb];
        children.push((ra, rb));
        heights.push(d);
    }
    Dendrogram { children, heights, sizes }
}

fn lambda_of(d: f64) -> f64 {
    if d > 0.0 {
        (1.0 / d).min(LAMBDA_CAP)
    } else {
        LAMBDA_CAP
    }
}

/// Condensed-tree cluster: birth level, parent, and the points that fall out
/// of it (directly) with their levels.
struct Condensed {
    parent: Option<usize>,
    birth: f64,
    children: Vec<usize>,
    /// (point, λ at which it leaves this cluster)
    points: Vec<(usize, f64)>,
    /// (sub-cluster size, λ at which it split off)
    child_sizes: Vec<(usize, f64)>,
}

fn leaves(d: &Dendrogram, n: usize, node: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(v) = stack.pop() {
        if v < n {
            out.push(v);
        } else {
            let (a, b) = d.children[v - n];
            stack.push(b);
            stack.push(a);
        }
    }
}

fn condense(d: &Dendrogram, n: usize, min_cluster_size: usize) -> Vec<Condensed> {
    let root = 2 * n - 2;
    let mut clusters = vec![Condensed {
        parent: None,
        birth: 0.0,
        children: Vec::new(),
        points: Vec::new(),
        child_sizes: Vec::new(),
    }];
    // (dendrogram node, condensed cluster it currently belongs to)
    let mut stack = vec![(root, 0usize)];
    while let Some((node, cid)) = stack.pop() {
        if node < n {
            // only reachable when the root itself is a point
            let birth = clusters[cid].birth;
            clusters[cid].points.push((node, birth));
            continue;
        }
        let t = node - n;
        let lambda = lambda_of(d.heights[t]);
        let (a, b) = d.children[t];
        let big_a = d.sizes[a] >= min_cluster_size;
        let big_b = d.sizes[b] >= min_cluster_size;
        match (big_a, big_b) {
            (true, true) => {
                for child in [a, b] {
                    let new_id = clusters.len();
                    clusters.push(Condensed {
                        parent: Some(cid),
                        birth: lambda,
                        children: Vec::new(),
                        points: Vec::new(),
                        child_sizes: Vec::new(),
                    });
                    clusters[cid].children.push(new_id);
                    clusters[cid].child_sizes.push((d.sizes[child], lambda));
                    stack.push((child, new_id));
                }
            }
            (true, false) | (false, true) => {
                let (keep, drop) = if big_a { (a, b) } else { (b, a) };
                let mut pts = Vec::new();
                leaves(d, n, drop, &mut pts);
                clusters[cid].points.extend(pts.into_iter().map(|p| (p, lambda)));
                stack.push((keep, cid));
            }
            (false, false) => {
                let mut pts = Vec::new();
                leaves(d, n, node, &mut pts);
                clusters[cid].points.extend(pts.into_iter().map(|p| (p, lambda)));
            }
        }
    }
    clusters
}

fn stability(c: &Condensed) -> f64 {
    let from_points: f64 = c.points.iter().map(|&(_, l)| l - c.birth).sum();
    let from_children: f64 = c.child_sizes.iter().map(|&(s, l)| s as f64 * (l - c.birth)).sum();
    from_points + from_children
}

fn select_eom(clusters: &[Condensed]) -> Vec<bool> {
    let m = clusters.len();
    let mut selected = vec![false; m];
    let mut best = vec![0.0; m];
    // children always carry larger ids than their parents
    for c in (1..m).rev() {
        let own = stability(&clusters[c]);
        let sub: f64 = clusters[c].children.iter().map(|&ch| best[ch]).sum();
        if clusters[c].children.is_empty() || own >= sub {
            selected[c] = true;
            best[c] = own;
            let mut stack = clusters[c].children.clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(clusters[d].children.iter().copied());
            }
        } else {
            best[c] = sub;
        }
    }
    selected
}

/// Automatic clustering with a noise group (`-1`). Fewer points than
/// `min_cluster_size` yields all noise.
pub fn hdbscan(x: &Array2<f64>, min_cluster_size: usize, min_samples: usize) -> Result<ClusterAssignment, ClusterError> {
    let n = x.nrows();
    if min_cluster_size < 2 {
        return Err(ClusterError::InvalidParams("min_cluster_size must be >= 2".into()));
    }
    if min_samples < 1 {
        return Err(ClusterError::InvalidParams("min_samples must be >= 1".into()));
    }
    if n < min_cluster_size || n < 2 {
        return Ok(ClusterAssignment::from_raw(&vec![NOISE; n], ClusterAlgorithm::Hdbscan, None, Vec::new()));
    }
    let dist = Array2::from_shape_fn((n, n), |(i, j)| sq_dist(x.row(i), x.row(j)).sqrt());
    let core = core_distances(&dist, min_samples);
    let mr = mutual_reachability(&dist, &core);
    let dendrogram = single_linkage(n, prim_mst(&mr));
    let clusters = condense(&dendrogram, n, min_cluster_size);
    let selected = select_eom(&clusters);

    let mut raw = vec![NOISE; n];
    for (cid, c) in clusters.iter().enumerate() {
        // nearest selected ancestor (inclusive)
        let mut cur = Some(cid);
        let mut owner = None;
        while let Some(k) = cur {
            if selected[k] {
                owner = Some(k);
            }
            cur = clusters[k].parent;
        }
        if let Some(o) = owner {
            for &(p, _) in &c.points {
                raw[p] = o as i64;
            }
        }
    }
    Ok(ClusterAssignment::from_raw(&raw, ClusterAlgorithm::Hdbscan, None, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::blobs;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_mutual_reachability() {
        // d(a,b)=1, d(a,c)=2, d(b,c)=2
        let d = Array2::from_shape_vec((3, 3), vec![0.0, 1.0, 2.0, 1.0, 0.0, 2.0, 2.0, 2.0, 0.0]).unwrap();
        let core = core_distances(&d, 2);
        assert_eq!(core, vec![2.0, 2.0, 2.0]);
        let mr = mutual_reachability(&d, &core);
        assert_eq!(mr[[0, 1]], 2.0);
        assert_eq!(mr[[0, 2]], 2.0);
    }

    #[test]
    fn below_size_floor_is_all_noise() {
        let x = Array2::from_shape_vec((4, 1), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let a = hdbscan(&x, 5, 5).unwrap();
        assert_eq!(a.labels, vec![-1; 4]);
        assert_eq!(a.n_clusters, 0);
    }

    #[test]
    fn two_blobs_with_outliers() {
        let (blob, _) = blobs(&[(0.0, 0.0), (10.0, 0.0)], 20, 1.0, 9);
        let outliers = [(5.0, 25.0), (-20.0, -18.0), (30.0, 22.0)];
        let mut x = Array2::zeros((43, 2));
        for i in 0..40 {
            x.row_mut(i).assign(&blob.row(i));
        }
        for (k, &(a, b)) in outliers.iter().enumerate() {
            x[[40 + k, 0]] = a;
            x[[40 + k, 1]] = b;
        }
        let (mcs, ms) = hdbscan_defaults(43);
        let a = hdbscan(&x, mcs, ms).unwrap();
        assert_eq!(a.n_clusters, 2, "{:?}", a.labels);
        assert_eq!(&a.labels[40..], &[-1, -1, -1]);
        let first = a.labels[0];
        assert!(a.labels[..20].iter().all(|&l| l == first));
        assert!(a.labels[20..40].iter().all(|&l| l == 1 - first));
    }

    #[test]
    fn duplicates_do_not_break_levels() {
        let mut x = Array2::zeros((12, 2));
        for i in 6..12 {
            x[[i, 0]] = 50.0;
        }
        let a = hdbscan(&x, 3, 3).unwrap();
        assert_eq!(a.n_clusters, 2);
        assert_eq!(a.noise_count(), 0);
    }

    #[test]
    fn defaults_scale_with_n() {
        assert_eq!(hdbscan_defaults(100), (5, 5));
        assert_eq!(hdbscan_defaults(300), (6, 6));
        assert_eq!(hdbscan_defaults(500), (10, 10));
    }

    proptest! {
        #[test]
        fn clusters_respect_min_size(seed in 0u64..5000, mcs in 2usize..8) {
            let (x, _) = blobs(&[(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)], 9, 1.2, seed);
            let a = hdbscan(&x, mcs, mcs).unwrap();
            prop_assert!(a.cluster_sizes().iter().all(|&s| s >= mcs));
            prop_assert_eq!(a.clone(), hdbscan(&x, mcs, mcs).unwrap());
        }
    }
}
