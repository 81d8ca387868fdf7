use super::{check_k, sq_dist, ClusterAlgorithm, ClusterAssignment, ClusterError};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn centroids(x: &Array2<f64>, u: &Array2<f64>, m: f64) -> Array2<f64> {
    let (n, d) = x.dim();
    let k = u.ncols();
    let mut v = Array2::zeros((k, d));
    for c in 0..k {
        let mut denom = 0.0;
        for i in 0..n {
            let w = u[[i, c]].powf(m);
            denom += w;
            for j in 0..d {
                v[[c, j]] += w * x[[i, j]];
            }
        }
        if denom > 0.0 {
            v.row_mut(c).mapv_inplace(|t| t / denom);
        }
    }
    v
}

/// `u_ik = 1 / Σ_j (d_ik/d_ij)^{2/(m−1)}`, crisp on exact coincidence.
fn memberships(x: &Array2<f64>, v: &Array2<f64>, m: f64) -> Array2<f64> {
    let n = x.nrows();
    let k = v.nrows();
    let p = 1.0 / (m - 1.0);
    let mut u = Array2::zeros((n, k));
    for i in 0..n {
        let d2: Vec<f64> = (0..k).map(|c| sq_dist(x.row(i), v.row(c))).collect();
        if let Some(hit) = d2.iter().position(|&d| d == 0.0) {
            u[[i, hit]] = 1.0;
            continue;
        }
        // ratios of squared distances raised to 1/(m-1), with the nearest
        // centroid as reference for numerical stability
        let dmin = d2.iter().copied().fold(f64::INFINITY, f64::min);
        let inv: Vec<f64> = d2.iter().map(|&d| (dmin / d).powf(p)).collect();
        let total: f64 = inv.iter().sum();
        for c in 0..k {
            u[[i, c]] = inv[c] / total;
        }
    }
    u
}

fn objective(x: &Array2<f64>, u: &Array2<f64>, v: &Array2<f64>, m: f64) -> f64 {
    let mut j = 0.0;
    for i in 0..x.nrows() {
        for c in 0..v.nrows() {
            j += u[[i, c]].powf(m) * sq_dist(x.row(i), v.row(c));
        }
    }
    j
}

/// Fuzzy C-Means from seeded random memberships. Stops when the largest
/// membership change drops below `tol`. Hard labels are per-row argmax with
/// ties to the lowest cluster.
pub fn fuzzy_cmeans(
    x: &Array2<f64>,
    k: usize,
    m: f64,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterAssignment, ClusterError> {
    let n = x.nrows();
    check_k(k, n)?;
    if !(m > 1.0 && m.is_finite()) {
        return Err(ClusterError::InvalidParams(format!("fuzzifier m must be > 1, got {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Array2::from_shape_fn((n, k), |_| rng.random_range(0.0..1.0) + 1e-3);
    for mut row in u.rows_mut() {
        let s = row.sum();
        row.mapv_inplace(|t| t / s);
    }
    let mut history = Vec::new();
    for _ in 0..max_iter.max(1) {
        let v = centroids(x, &u, m);
        let next = memberships(x, &v, m);
        let change = next.iter().zip(u.iter()).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        history.push(objective(x, &next, &v, m));
        u = next;
        if change < tol {
            break;
        }
    }
    let raw: Vec<i64> = u
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for c in 1..k {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best as i64
        })
        .collect();
    Ok(ClusterAssignment::from_raw(&raw, ClusterAlgorithm::FuzzyCmeans, Some(u), history))
}
