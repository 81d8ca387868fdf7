use super::{check_k, sq_dist, ClusterAlgorithm, ClusterAssignment, ClusterError};
use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nearest(x: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(x, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Index of the first entry whose prefix sum exceeds `r`.
fn sample_index(weights: &[f64], r: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if acc > r {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Greedy k-means++: each step draws `2 + ln K` D²-weighted candidates and
/// keeps the one that lowers the potential most.
fn kmeans_pp(x: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = x.nrows();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut centroids = Array2::zeros((k, x.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&x.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();
    for c in 1..k {
        let potential: f64 = closest.iter().sum();
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for _ in 0..trials {
            let cand = if potential > 0.0 {
                sample_index(&closest, rng.random::<f64>() * potential)
            } else {
                rng.random_range(0..n)
            };
            let updated: Vec<f64> = (0..n).map(|i| closest[i].min(sq_dist(x.row(i), x.row(cand)))).collect();
            let pot: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| pot < b.1) {
                best = Some((cand, pot, updated));
            }
        }
        let (cand, _, updated) = best.expect("at least one trial");
        centroids.row_mut(c).assign(&x.row(cand));
        closest = updated;
    }
    centroids
}

/// Lloyd's algorithm from a greedy k-means++ start. Stops when every
/// centroid moves less than `tol` (Euclidean) or after `max_iter` rounds.
pub fn kmeans(x: &Array2<f64>, k: usize, seed: u64, max_iter: usize, tol: f64) -> Result<ClusterAssignment, ClusterError> {
    let (n, d) = x.dim();
    check_k(k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp(x, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut history = Vec::new();

    for _ in 0..max_iter.max(1) {
        let mut inertia = 0.0;
        for i in 0..n {
            let (c, dist) = nearest(x.row(i), &centroids);
            labels[i] = c;
            inertia += dist;
        }
        history.push(inertia);

        let mut sums = Array2::<f64>::zeros((k, d));
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += &x.row(i);
            counts[labels[i]] += 1;
        }
        let mut next = centroids.clone();
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                next.row_mut(c).assign(&(&sums.row(c) / counts[c] as f64));
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // reseed to the point farthest from its own centroid
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| {
                        let da = sq_dist(x.row(a), next.row(labels[a]));
                        let db = sq_dist(x.row(b), next.row(labels[b]));
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                taken[far] = true;
                next.row_mut(c).assign(&x.row(far));
            }
        }
        let shift = (0..k).map(|c| sq_dist(centroids.row(c), next.row(c)).sqrt()).fold(0.0f64, f64::max);
        centroids = next;
        if shift < tol {
            break;
        }
    }
    // final assignment against the converged centroids
    let mut inertia = 0.0;
    for i in 0..n {
        let (c, dist) = nearest(x.row(i), &centroids);
        labels[i] = c;
        inertia += dist;
    }
    history.push(inertia);
    let raw: Vec<i64> = labels.iter().map(|&l| l as i64).collect();
    Ok(ClusterAssignment::from_raw(&raw, ClusterAlgorithm::Kmeans, None, history))
}
