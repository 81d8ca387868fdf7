use super::{Metric, MetricError};
use ndarray::{Array1, Array2};
use std::collections::BTreeMap;

/// Non-noise rows grouped by label, in label order.
fn groups(labels: &[i64]) -> BTreeMap<i64, Vec<usize>> {
    let mut g: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            g.entry(l).or_default().push(i);
        }
    }
    g
}

fn check(x: &Array2<f64>, labels: &[i64]) -> Result<(), MetricError> {
    if x.nrows() != labels.len() {
        return Err(MetricError::Undefined(format!("{} rows but {} labels", x.nrows(), labels.len())));
    }
    Ok(())
}

fn dist(x: &Array2<f64>, i: usize, j: usize) -> f64 {
    x.row(i).iter().zip(x.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn centroid(x: &Array2<f64>, members: &[usize]) -> Array1<f64> {
    let mut c = Array1::zeros(x.ncols());
    for &i in members {
        c += &x.row(i);
    }
    c / members.len() as f64
}

/// Mean silhouette over non-noise points; members of singleton clusters
/// score 0.
pub fn silhouette(x: &Array2<f64>, labels: &[i64]) -> Result<f64, MetricError> {
    check(x, labels)?;
    let g = groups(labels);
    if g.len() < 2 {
        return Err(MetricError::Undefined(format!("silhouette needs >= 2 clusters, got {}", g.len())));
    }
    let clusters: Vec<&Vec<usize>> = g.values().collect();
    let mut total = 0.0;
    let mut count = 0usize;
    for (ci, members) in clusters.iter().enumerate() {
        for &i in members.iter() {
            count += 1;
            if members.len() == 1 {
                continue;
            }
            let a = members.iter().filter(|&&j| j != i).map(|&j| dist(x, i, j)).sum::<f64>() / (members.len() - 1) as f64;
            let b = clusters
                .iter()
                .enumerate()
                .filter(|(cj, _)| *cj != ci)
                .map(|(_, other)| other.iter().map(|&j| dist(x, i, j)).sum::<f64>() / other.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    Ok(total / count as f64)
}

/// `(BGSS / (k − 1)) / (WGSS / (n − k))`; zero within-cluster dispersion
/// gives the infinite sentinel.
pub fn calinski_harabasz(x: &Array2<f64>, labels: &[i64]) -> Result<Metric, MetricError> {
    check(x, labels)?;
    let g = groups(labels);
    let k = g.len();
    let n: usize = g.values().map(Vec::len).sum();
    if k < 2 || k + 1 > n {
        return Err(MetricError::Undefined(format!("Calinski-Harabasz needs 2 <= k <= n-1 (k={k}, n={n})")));
    }
    let all: Vec<usize> = g.values().flatten().copied().collect();
    let overall = centroid(x, &all);
    let (mut bgss, mut wgss) = (0.0, 0.0);
    for members in g.values() {
        let c = centroid(x, members);
        bgss += members.len() as f64 * (&c - &overall).mapv(|v| v * v).sum();
        for &i in members {
            wgss += (&x.row(i) - &c).mapv(|v| v * v).sum();
        }
    }
    if wgss == 0.0 {
        return Ok(Metric::Infinite);
    }
    Ok(Metric::value((bgss / (k - 1) as f64) / (wgss / (n - k) as f64)))
}

/// Mean over clusters of `max_{j≠i} (S_i + S_j) / M_ij`; coincident
/// centroids give the infinite sentinel.
pub fn davies_bouldin(x: &Array2<f64>, labels: &[i64]) -> Result<Metric, MetricError> {
    check(x, labels)?;
    let g = groups(labels);
    let k = g.len();
    if k < 2 {
        return Err(MetricError::Undefined(format!("Davies-Bouldin needs >= 2 clusters, got {k}")));
    }
    let cents: Vec<Array1<f64>> = g.values().map(|m| centroid(x, m)).collect();
    let scatter: Vec<f64> = g
        .values()
        .zip(&cents)
        .map(|(m, c)| m.iter().map(|&i| (&x.row(i) - c).mapv(|v| v * v).sum().sqrt()).sum::<f64>() / m.len() as f64)
        .collect();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let m = (&cents[i] - &cents[j]).mapv(|v| v * v).sum().sqrt();
            if m == 0.0 {
                return Ok(Metric::Infinite);
            }
            worst = worst.max((scatter[i] + scatter[j]) / m);
        }
        total += worst;
    }
    Ok(Metric::value(total / k as f64))
}
