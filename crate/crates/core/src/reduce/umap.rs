//! UMAP layout: curve fit, spectral initialization and negative-sampling SGD.

use super::knn::{fuzzy_union, knn_graph, FuzzyGraph};
use super::svd::sorted_eigen;
use super::{ReduceError, ReducedMatrix, ReductionConfig, ReductionMethod};
use crate::exec::Execution;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

const FIT_POINTS: usize = 300;
const GRAD_CLIP: f64 = 4.0;
const INITIAL_ALPHA: f64 = 1.0;
const REPULSION: f64 = 1.0;
const INIT_SPAN: f64 = 10.0;

fn target_curve(t: f64, min_dist: f64, spread: f64) -> f64 {
    if t < min_dist {
        1.0
    } else {
        (-(t - min_dist) / spread).exp()
    }
}

/// Least-squares fit of `(1 + a·t^{2b})^{-1}` to the offset exponential on
/// `t ∈ [0, 3·spread]` (Levenberg-Marquardt from `a = b = 1`).
pub fn fit_ab(min_dist: f64, spread: f64) -> (f64, f64) {
    let ts: Vec<f64> = (0..FIT_POINTS).map(|i| 3.0 * spread * i as f64 / (FIT_POINTS - 1) as f64).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| target_curve(t, min_dist, spread)).collect();
    let sse = |a: f64, b: f64| -> f64 {
        ts.iter()
            .zip(&ys)
            .map(|(&t, &y)| (1.0 / (1.0 + a * t.powf(2.0 * b)) - y).powi(2))
            .sum()
    };
    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut lambda = 1e-3;
    let mut cost = sse(a, b);
    for _ in 0..500 {
        // normal equations J^T J and J^T r
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in ts.iter().zip(&ys) {
            if t <= 0.0 {
                continue;
            }
            let u = t.powf(2.0 * b);
            let den = 1.0 + a * u;
            let f = 1.0 / den;
            let r = f - y;
            let da = -u / (den * den);
            let db = -a * u * 2.0 * t.ln() / (den * den);
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        for _ in 0..30 {
            let m00 = jaa * (1.0 + lambda);
            let m11 = jbb * (1.0 + lambda);
            let det = m00 * m11 - jab * jab;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(m11 * ga - jab * gb) / det;
            let step_b = -(m00 * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            if na > 0.0 && nb > 0.0 {
                let c = sse(na, nb);
                if c < cost {
                    let rel = (cost - c) / cost.max(1e-300);
                    a = na;
                    b = nb;
                    cost = c;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = rel > 1e-15;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Spectral,
    Random,
}

/// Diagnostics from one layout run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UmapTrace {
    pub a: f64,
    pub b: f64,
    pub init: InitKind,
    /// Fuzzy cross-entropy after each epoch (empty unless requested).
    pub loss: Vec<f64>,
    /// Coordinates pulled back inside the divergence guard.
    pub guard_clamps: usize,
}

fn rescale_columns(y: &mut Array2<f64>) {
    for mut col in y.columns_mut() {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        if span > 0.0 {
            col.mapv_inplace(|v| INIT_SPAN * (v - lo) / span);
        } else {
            col.fill(INIT_SPAN / 2.0);
        }
    }
}

fn spectral_layout(graph: &FuzzyGraph, dim: usize, rng: &mut ChaCha8Rng) -> Option<Array2<f64>> {
    let n = graph.n;
    if dim + 1 >= n || graph.component_count() != 1 {
        return None;
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|i| graph.degree(i)).map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
    let mut m = Array2::<f64>::zeros((n, n));
    for (i, j, w) in graph.entries() {
        m[[i, j]] = w * inv_sqrt[i] * inv_sqrt[j];
    }
    // top eigenvectors of D^-1/2 W D^-1/2 are the bottom ones of the
    // normalized Laplacian; the first is the trivial one
    let (_, vecs) = sorted_eigen(&m);
    let mut y = Array2::<f64>::zeros((n, dim));
    for c in 0..dim {
        y.column_mut(c).assign(&vecs.column(c + 1));
    }
    let max_abs = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(max_abs.is_finite() && max_abs > 0.0) {
        return None;
    }
    let noise = Normal::new(0.0, 1e-4).expect("valid sd");
    y.mapv_inplace(|v| v * (INIT_SPAN / max_abs) + noise.sample(rng));
    Some(y)
}

fn random_layout(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let normal = Normal::new(0.0, 1.0).expect("valid sd");
    Array2::from_shape_fn((n, dim), |_| normal.sample(rng))
}

fn clip(g: f64) -> f64 {
    g.clamp(-GRAD_CLIP, GRAD_CLIP)
}

fn cross_entropy(graph: &FuzzyGraph, y: &Array2<f64>, a: f64, b: f64) -> f64 {
    const EPS: f64 = 1e-12;
    let n = y.nrows();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d2: f64 = y.row(i).iter().zip(y.row(j).iter()).map(|(p, q)| (p - q) * (p - q)).sum();
            let q = (1.0 / (1.0 + a * d2.powf(b))).clamp(EPS, 1.0 - EPS);
            let w = graph.get(i, j);
            total -= w * q.ln() + (1.0 - w) * (1.0 - q).ln();
        }
    }
    total
}

/// UMAP of the rows of `x`. Optimization is single-threaded for fixed-seed
/// determinism; `exec` only parallelizes the distance computation.
pub fn umap_embed(x: &Array2<f64>, cfg: &ReductionConfig, exec: Execution) -> Result<ReducedMatrix, ReduceError> {
    umap_embed_traced(x, cfg, exec, false).map(|(m, _)| m)
}

pub fn umap_embed_traced(
    x: &Array2<f64>,
    cfg: &ReductionConfig,
    exec: Execution,
    record_loss: bool,
) -> Result<(ReducedMatrix, UmapTrace), ReduceError> {
    let p = &cfg.umap;
    p.validate()?;
    let n = x.nrows();
    let dim = cfg.n_components;
    if dim == 0 {
        return Err(ReduceError::Dimension("n_components must be >= 1".into()));
    }
    if n < p.n_neighbors + 1 {
        return Err(ReduceError::InvalidParams(format!(
            "UMAP with n_neighbors={} needs at least {} rows, got {n}",
            p.n_neighbors,
            p.n_neighbors + 1
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ReduceError::Dimension("input has non-finite entries".into()));
    }

    let knn = knn_graph(x, p.n_neighbors, p.metric, exec)?;
    let graph = fuzzy_union(&knn);
    let (a, b) = fit_ab(p.min_dist, p.spread);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let (mut y, init) = match spectral_layout(&graph, dim, &mut rng) {
        Some(y) => (y, InitKind::Spectral),
        None => {
            log::info!("spectral initialization unavailable (disconnected graph or n too small); using seeded Gaussian");
            (random_layout(n, dim, &mut rng), InitKind::Random)
        }
    };
    rescale_columns(&mut y);

    let mut heads = Vec::new();
    let mut tails = Vec::new();
    let mut weights = Vec::new();
    let max_w = graph.entries().map(|e| e.2).fold(0.0f64, f64::max);
    let n_epochs = p.n_epochs;
    for (i, j, w) in graph.entries() {
        // edges too weak to be sampled even once are dropped
        if w >= max_w / n_epochs as f64 {
            heads.push(i);
            tails.push(j);
            weights.push(w);
        }
    }
    let epochs_per_sample: Vec<f64> = weights.iter().map(|&w| n_epochs as f64 / (n_epochs as f64 * w / max_w)).collect();
    let neg_rate = p.negative_sample_rate.max(1) as f64;
    let eps_neg: Vec<f64> = epochs_per_sample.iter().map(|e| e / neg_rate).collect();
    let mut next_sample = epochs_per_sample.clone();
    let mut next_negative = eps_neg.clone();
    let guard = 10.0 * p.spread * (n as f64).sqrt();
    let mut guard_clamps = 0;
    let mut loss = Vec::new();

    let mut current = vec![0.0; dim];
    for epoch in 0..n_epochs {
        let alpha = INITIAL_ALPHA * (1.0 - epoch as f64 / n_epochs as f64);
        let e = epoch as f64;
        for edge in 0..heads.len() {
            if next_sample[edge] > e {
                continue;
            }
            let j = heads[edge];
            let k = tails[edge];
            let d2: f64 = (0..dim).map(|c| (y[[j, c]] - y[[k, c]]).powi(2)).sum();
            let coeff = if d2 > 0.0 {
                -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
            } else {
                0.0
            };
            for c in 0..dim {
                let g = clip(coeff * (y[[j, c]] - y[[k, c]]));
                y[[j, c]] += g * alpha;
                y[[k, c]] -= g * alpha;
            }
            next_sample[edge] += epochs_per_sample[edge];

            let n_neg = ((e - next_negative[edge]) / eps_neg[edge]).floor().max(0.0) as usize;
            for c in 0..dim {
                current[c] = y[[j, c]];
            }
            for _ in 0..n_neg {
                let other = rng.random_range(0..n);
                if other == j {
                    continue;
                }
                let d2: f64 = (0..dim).map(|c| (current[c] - y[[other, c]]).powi(2)).sum();
                if d2 <= 0.0 {
                    continue;
                }
                let coeff = 2.0 * REPULSION * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0));
                for c in 0..dim {
                    let g = clip(coeff * (current[c] - y[[other, c]]));
                    current[c] += g * alpha;
                }
            }
            for c in 0..dim {
                y[[j, c]] = current[c];
            }
            next_negative[edge] += n_neg as f64 * eps_neg[edge];
        }
        for v in y.iter_mut() {
            if v.abs() > guard {
                *v = v.clamp(-guard, guard);
                guard_clamps += 1;
            }
        }
        if record_loss {
            loss.push(cross_entropy(&graph, &y, a, b));
        }
    }
    if guard_clamps > 0 {
        log::warn!("UMAP divergence guard clamped {guard_clamps} coordinates");
    }
    let reduced = ReducedMatrix {
        values: y,
        method: ReductionMethod::Umap,
        config: cfg.clone(),
    };
    Ok((
        reduced,
        UmapTrace {
            a,
            b,
            init,
            loss,
            guard_clamps,
        },
    ))
}
