//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Oracles here are written from the definitions, independently of
//! the library code they check.

use eliot_core::arxiv::{ArxivClient, QuerySpec};
use eliot_core::cluster::{agglomerative_ward, fuzzy_cmeans, hdbscan, hdbscan_defaults, kmeans, ward_merges, ClusterAlgorithm, ClusterAssignment, ClusterMode};
use eliot_core::exec::Execution;
use eliot_core::explorer::{parse_date_bound, Explorer, PipelineConfig};
use eliot_core::labeling::{ctfidf_keywords, LabelingConfig};
use eliot_core::metrics::{calinski_harabasz, cv_coherence, davies_bouldin, npmi_coherence, silhouette, CoherenceConfig};
use eliot_core::reduce::{umap_embed, DistanceMetric, ReductionConfig, ReductionMethod, UmapParams};
use eliot_core::sweep::{
    component_frequency_default, rank_aggregate, run_sweep, write_csv, ConfigTuple, SweepCorpus, SweepGrid, SweepMetrics,
    SweepOptions, CSV_COLUMNS,
};
use eliot_core::text::{PreprocessedDoc, Representation, RepresentationConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s as f64, || format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------- oracles

fn rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn mean_of(pts: &[&Vec<f64>]) -> Vec<f64> {
    let d = pts[0].len();
    (0..d).map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / pts.len() as f64).collect()
}

fn by_label<'a>(x: &'a [Vec<f64>], labels: &[i64]) -> BTreeMap<i64, Vec<&'a Vec<f64>>> {
    let mut g: BTreeMap<i64, Vec<&Vec<f64>>> = BTreeMap::new();
    for (p, &l) in x.iter().zip(labels) {
        g.entry(l).or_default().push(p);
    }
    g
}

fn naive_silhouette(x: &[Vec<f64>], labels: &[i64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| euclid(&x[i], &x[j])).sum::<f64>() / own.len() as f64;
        let others: BTreeSet<i64> = labels.iter().copied().filter(|&l| l != labels[i]).collect();
        let b = others
            .iter()
            .map(|&l| {
                let m: Vec<usize> = (0..n).filter(|&j| labels[j] == l).collect();
                m.iter().map(|&j| euclid(&x[i], &x[j])).sum::<f64>() / m.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        s += (b - a) / a.max(b);
    }
    s / n as f64
}

fn naive_chi(x: &[Vec<f64>], labels: &[i64]) -> f64 {
    let all: Vec<&Vec<f64>> = x.iter().collect();
    let g = by_label(x, labels);
    let overall = mean_of(&all);
    let (mut b, mut w) = (0.0, 0.0);
    for pts in g.values() {
        let c = mean_of(pts);
        b += pts.len() as f64 * euclid(&c, &overall).powi(2);
        w += pts.iter().map(|p| euclid(p, &c).powi(2)).sum::<f64>();
    }
    let (n, k) = (x.len() as f64, g.len() as f64);
    (b / (k - 1.0)) / (w / (n - k))
}

fn naive_dbi(x: &[Vec<f64>], labels: &[i64]) -> f64 {
    let g = by_label(x, labels);
    let stats: Vec<(Vec<f64>, f64)> = g
        .values()
        .map(|pts| {
            let c = mean_of(pts);
            let s = pts.iter().map(|p| euclid(p, &c)).sum::<f64>() / pts.len() as f64;
            (c, s)
        })
        .collect();
    let k = stats.len();
    (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (stats[i].1 + stats[j].1) / euclid(&stats[i].0, &stats[j].0))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / k as f64
}

fn ari(a: &[i64], b: &[i64]) -> f64 {
    let choose2 = |m: f64| m * (m - 1.0) / 2.0;
    let mut table: HashMap<(i64, i64), f64> = HashMap::new();
    let mut ra: HashMap<i64, f64> = HashMap::new();
    let mut rb: HashMap<i64, f64> = HashMap::new();
    for (&p, &q) in a.iter().zip(b) {
        *table.entry((p, q)).or_default() += 1.0;
        *ra.entry(p).or_default() += 1.0;
        *rb.entry(q).or_default() += 1.0;
    }
    let index: f64 = table.values().map(|&m| choose2(m)).sum();
    let sa: f64 = ra.values().map(|&m| choose2(m)).sum();
    let sb: f64 = rb.values().map(|&m| choose2(m)).sum();
    let expected = sa * sb / choose2(a.len() as f64);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

fn partition(labels: &[i64]) -> BTreeSet<BTreeSet<usize>> {
    let mut g: BTreeMap<i64, BTreeSet<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        g.entry(l).or_default().insert(i);
    }
    g.into_values().collect()
}

fn sse(x: &[Vec<f64>], members: &[usize]) -> f64 {
    let pts: Vec<&Vec<f64>> = members.iter().map(|&i| &x[i]).collect();
    let c = mean_of(&pts);
    pts.iter().map(|p| euclid(p, &c).powi(2)).sum()
}

/// Brute-force Ward: every step scans all cluster pairs and recomputes the
/// merged sum of squares from the points. Returns the partition at each
/// cluster count and the merge costs in order.
fn naive_ward(x: &[Vec<f64>]) -> (BTreeMap<usize, BTreeSet<BTreeSet<usize>>>, Vec<f64>) {
    let mut clusters: Vec<Vec<usize>> = (0..x.len()).map(|i| vec![i]).collect();
    let snapshot = |cs: &Vec<Vec<usize>>| cs.iter().map(|c| c.iter().copied().collect()).collect::<BTreeSet<BTreeSet<usize>>>();
    let mut parts = BTreeMap::new();
    let mut costs = Vec::new();
    parts.insert(clusters.len(), snapshot(&clusters));
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut both = clusters[a].clone();
                both.extend(&clusters[b]);
                let cost = sse(x, &both) - sse(x, &clusters[a]) - sse(x, &clusters[b]);
                if cost < best.0 {
                    best = (cost, a, b);
                }
            }
        }
        let (cost, a, b) = best;
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        costs.push(cost);
        parts.insert(clusters.len(), snapshot(&clusters));
    }
    (parts, costs)
}

fn knn_sets(x: &[Vec<f64>], k: usize) -> Vec<BTreeSet<usize>> {
    (0..x.len())
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..x.len()).filter(|&j| j != i).map(|j| (euclid(&x[i], &x[j]), j)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

fn preservation(high: &[Vec<f64>], low: &[Vec<f64>], k: usize) -> f64 {
    let (a, b) = (knn_sets(high, k), knn_sets(low, k));
    let kept: usize = a.iter().zip(&b).map(|(p, q)| p.intersection(q).count()).sum();
    kept as f64 / (high.len() * k) as f64
}

// ---------------------------------------------------------------- data

fn gaussian_points(centres: &[Vec<f64>], per: usize, sd: f64, seed: u64) -> (Array2<f64>, Vec<i64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sd).unwrap();
    let d = centres[0].len();
    let n = centres.len() * per;
    let mut x = Array2::zeros((n, d));
    let mut truth = Vec::with_capacity(n);
    for (c, centre) in centres.iter().enumerate() {
        for p in 0..per {
            for j in 0..d {
                x[[c * per + p, j]] = centre[j] + normal.sample(&mut rng);
            }
            truth.push(c as i64);
        }
    }
    (x, truth)
}

fn tokens(i: usize, s: &str) -> PreprocessedDoc {
    PreprocessedDoc::from_tokens(i, s.split_whitespace())
}

fn hard_assignment(labels: Vec<i64>) -> ClusterAssignment {
    let n_clusters = labels.iter().filter(|&&l| l >= 0).collect::<BTreeSet<_>>().len();
    ClusterAssignment {
        labels,
        n_clusters,
        mode: ClusterMode::UserControlled,
        algorithm: ClusterAlgorithm::Kmeans,
        memberships: None,
        objective_history: Vec::new(),
    }
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/arxiv")
}

fn fixture_spec() -> QuerySpec {
    QuerySpec::new(["large language models"])
        .with_category("cs")
        .with_dates(parse_date_bound("2024-04", false).ok(), parse_date_bound("2026-04", true).ok())
}

// ---------------------------------------------------------------- criteria

fn metric_oracles() -> Outcome {
    let started = Instant::now();
    let x = Array2::from_shape_vec((4, 2), vec![0.0, 0.0, 0.0, 1.0, 10.0, 10.0, 10.0, 11.0]).unwrap();
    let labels = [0, 0, 1, 1];
    let sil = silhouette(&x, &labels).map_err(|e| e.to_string())?;
    let chi = calinski_harabasz(&x, &labels).map_err(|e| e.to_string())?.as_f64().ok_or("CHI not finite")?;
    let dbi = davies_bouldin(&x, &labels).map_err(|e| e.to_string())?.as_f64().ok_or("DBI not finite")?;
    ensure((sil - 0.9293).abs() <= 1e-4, || format!("fixture SIL {sil}"))?;
    ensure(chi == 400.0, || format!("fixture CHI {chi}"))?;
    ensure((dbi - 0.0707).abs() <= 1e-4, || format!("fixture DBI {dbi}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = rng.random_range(6..=40);
        let d = rng.random_range(1..=8);
        let k = rng.random_range(2..=5usize.min(n / 2));
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-5.0..5.0));
        let mut labels: Vec<i64> = (0..n).map(|i| (i % k) as i64).collect();
        for i in (1..n).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let p = rows(&x);
        let got = [
            silhouette(&x, &labels).map_err(|e| e.to_string())?,
            calinski_harabasz(&x, &labels).map_err(|e| e.to_string())?.as_f64().ok_or("CHI not finite")?,
            davies_bouldin(&x, &labels).map_err(|e| e.to_string())?.as_f64().ok_or("DBI not finite")?,
        ];
        let want = [naive_silhouette(&p, &labels), naive_chi(&p, &labels), naive_dbi(&p, &labels)];
        for (name, (g, w)) in ["SIL", "CHI", "DBI"].iter().zip(got.iter().zip(&want)) {
            let diff = (g - w).abs();
            worst = worst.max(diff);
            ensure(diff <= 1e-9, || format!("case {case} (n={n}, d={d}, k={k}): {name} {g} vs oracle {w}"))?;
        }
    }
    within(started.elapsed(), 5)?;
    Ok(format!(
        "fixture SIL={sil:.4} CHI={chi} DBI={dbi:.4}; 50 random instances, max |diff| {worst:.1e}; {:.2}s",
        started.elapsed().as_secs_f64()
    ))
}

fn clustering_recovery() -> Outcome {
    let started = Instant::now();
    let centres = vec![vec![0.0, 0.0], vec![12.0, 0.0], vec![6.0, 12.0]];
    for seed in 0..20u64 {
        let (x, truth) = gaussian_points(&centres, 20, 1.0, 100 + seed);
        let km = kmeans(&x, 3, seed, 300, 1e-6).map_err(|e| e.to_string())?;
        let ward = agglomerative_ward(&x, 3).map_err(|e| e.to_string())?;
        let (a, b) = (ari(&truth, &km.labels), ari(&truth, &ward.labels));
        ensure(a == 1.0 && b == 1.0, || format!("seed {seed}: ARI kmeans {a}, ward {b}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut fixtures = 0;
    for n in 2..=8usize {
        for _ in 0..30 {
            let d = rng.random_range(1..=3);
            let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-10.0..10.0));
            let p = rows(&x);
            let (parts, costs) = naive_ward(&p);
            let merges = ward_merges(&x);
            ensure(merges.len() == n - 1, || format!("n={n}: {} merges", merges.len()))?;
            for (m, c) in merges.iter().zip(&costs) {
                ensure((m.cost - c).abs() <= 1e-9 * c.max(1.0), || format!("n={n}: merge cost {} vs naive {c}", m.cost))?;
            }
            for k in 1..=n {
                let got = agglomerative_ward(&x, k).map_err(|e| e.to_string())?;
                ensure(partition(&got.labels) == parts[&k], || format!("n={n}, k={k}: partition differs from naive Ward"))?;
            }
            fixtures += 1;
        }
    }

    let (x, _) = gaussian_points(&centres, 15, 2.0, 5);
    for seed in 0..10u64 {
        let f = fuzzy_cmeans(&x, 3, 2.0, seed, 300, 1e-9).map_err(|e| e.to_string())?;
        let h = &f.objective_history;
        ensure(h.len() >= 2, || format!("seed {seed}: only {} objective values", h.len()))?;
        ensure(h.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), || format!("seed {seed}: objective rises {h:?}"))?;
    }

    let (blobs, _) = gaussian_points(&[vec![0.0, 0.0], vec![10.0, 0.0]], 20, 1.0, 9);
    let mut pts = rows(&blobs);
    pts.extend([vec![5.0, 25.0], vec![-20.0, -18.0], vec![30.0, 22.0]]);
    let x = Array2::from_shape_vec((pts.len(), 2), pts.concat()).unwrap();
    let (mcs, ms) = hdbscan_defaults(x.nrows());
    let h = hdbscan(&x, mcs, ms).map_err(|e| e.to_string())?;
    ensure(h.n_clusters == 2 && h.noise_count() == 3, || {
        format!("HDBSCAN: {} clusters, {} noise", h.n_clusters, h.noise_count())
    })?;
    ensure(h.labels[40..].iter().all(|&l| l == -1), || "outliers not labelled noise".into())?;
    within(started.elapsed(), 30)?;
    Ok(format!(
        "ARI 1.0 over 20 seeds; {fixtures} Ward fixtures match brute force; FCM monotone; HDBSCAN 2 clusters + 3 noise; {:.2}s",
        started.elapsed().as_secs_f64()
    ))
}

fn umap_sanity() -> Outcome {
    let dims = 20;
    let centres: Vec<Vec<f64>> = (0..2).map(|c| (0..dims).map(|j| if j == c { 30.0 } else { 0.0 }).collect()).collect();
    let (x, _) = gaussian_points(&centres, 20, 1.0, 5);
    let cfg = ReductionConfig {
        method: ReductionMethod::Umap,
        n_components: 10,
        umap: UmapParams {
            metric: DistanceMetric::Euclidean,
            ..UmapParams::default()
        },
    }
    .with_seed(3);
    let a = umap_embed(&x, &cfg, Execution::Sequential).map_err(|e| e.to_string())?;
    let b = umap_embed(&x, &cfg, Execution::Sequential).map_err(|e| e.to_string())?;
    let c = umap_embed(&x, &cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    let bits = |m: &Array2<f64>| m.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
    ensure(bits(&a.values) == bits(&b.values) && bits(&a.values) == bits(&c.values), || "same seed, different bytes".into())?;

    let high = rows(&x);
    let ours = preservation(&high, &rows(&a.values), 5);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let random = Array2::from_shape_fn((x.nrows(), 10), |_| rng.random_range(0.0..10.0));
    let baseline = preservation(&high, &rows(&random), 5);
    ensure(ours >= 0.6, || format!("5-NN preservation {ours:.3}"))?;
    ensure(baseline <= 0.2, || format!("random baseline {baseline:.3}"))?;
    Ok(format!("5-NN preservation {ours:.3} vs random {baseline:.3}; fixed seed byte-exact"))
}

fn ctfidf_checks() -> Outcome {
    let unigrams = |top_n| LabelingConfig {
        top_n,
        ngram_range: (1, 1),
    };
    let docs = [tokens(0, "apple apple banana"), tokens(1, "car car banana")];
    let set = ctfidf_keywords(&docs, &hard_assignment(vec![0, 1]), &unigrams(2)).map_err(|e| e.to_string())?;
    let top = &set.clusters[0].keywords[0];
    ensure(top.term == "apple" && (top.weight - 1.8326).abs() <= 1e-3, || format!("top keyword {top:?}"))?;

    // A term that occurs in fewer places overall must outrank a term with
    // the same in-class count that occurs more widely.
    let words = ["alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "theta"];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut comparisons = 0;
    for case in 0..100 {
        let classes = rng.random_range(2..=4);
        let n_docs = rng.random_range(classes..=classes * 3);
        let labels: Vec<i64> = (0..n_docs).map(|i| if i < classes { i as i64 } else { rng.random_range(0..classes) as i64 }).collect();
        let docs: Vec<PreprocessedDoc> = (0..n_docs)
            .map(|i| {
                let len = rng.random_range(1..10);
                PreprocessedDoc::from_tokens(i, (0..len).map(|_| words[rng.random_range(0..words.len())]))
            })
            .collect();
        let mut tf: BTreeMap<(i64, &str), usize> = BTreeMap::new();
        let mut total: BTreeMap<&str, usize> = BTreeMap::new();
        for (d, &l) in docs.iter().zip(&labels) {
            for t in &d.tokens {
                *tf.entry((l, t.as_str())).or_default() += 1;
                *total.entry(t.as_str()).or_default() += 1;
            }
        }
        let set = ctfidf_keywords(&docs, &hard_assignment(labels.clone()), &unigrams(words.len())).map_err(|e| e.to_string())?;
        for c in &set.clusters {
            let weight: HashMap<&str, f64> = c.keywords.iter().map(|k| (k.term.as_str(), k.weight)).collect();
            for s in &c.keywords {
                for t in &c.keywords {
                    let (ts, tt) = (tf[&(c.cluster_id, s.term.as_str())], tf[&(c.cluster_id, t.term.as_str())]);
                    if ts == tt && total[s.term.as_str()] < total[t.term.as_str()] {
                        comparisons += 1;
                        ensure(weight[s.term.as_str()] > weight[t.term.as_str()], || {
                            format!("case {case}: {} ({}) not above {} ({})", s.term, s.weight, t.term, t.weight)
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!("apple W={:.4}; exclusivity held on 100 random fixtures ({comparisons} pairs)", top.weight))
}

fn coherence_checks() -> Outcome {
    let cfg = CoherenceConfig::default();
    let topic = vec![vec!["a".to_string(), "b".to_string()]];
    let docs: Vec<Vec<&str>> = vec![vec!["a", "b"], vec!["a", "b"], vec!["a", "x"], vec!["b", "y"]];
    let npmi = npmi_coherence(&topic, &docs, &cfg).map_err(|e| e.to_string())?.value;
    let want = (0.5f64 / 0.5625).ln() / -(0.5f64).ln();
    ensure((npmi - want).abs() <= 1e-3 && (npmi + 0.1699).abs() <= 1e-3, || format!("NPMI {npmi}, expected {want}"))?;

    let docs_cv: Vec<Vec<&str>> = vec![vec!["a", "b"], vec!["c"], vec!["a", "b"], vec!["d"]];
    let cv = cv_coherence(&topic, &docs_cv, &cfg).map_err(|e| e.to_string())?.value;
    ensure((cv - 1.0).abs() <= 1e-9, || format!("C_V identical topic {cv}"))?;

    let vocab = ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8", "w9"];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut scored = 0;
    for case in 0..200 {
        let docs: Vec<Vec<&str>> = (0..rng.random_range(1..12))
            .map(|_| (0..rng.random_range(1..30)).map(|_| vocab[rng.random_range(0..vocab.len())]).collect())
            .collect();
        let topics: Vec<Vec<String>> = (0..rng.random_range(1..4))
            .map(|_| {
                let mut t: Vec<String> = vocab.iter().map(|w| w.to_string()).collect();
                for i in (1..t.len()).rev() {
                    t.swap(i, rng.random_range(0..=i));
                }
                t.truncate(rng.random_range(2..6));
                t
            })
            .collect();
        let small = CoherenceConfig {
            window_npmi: rng.random_range(1..12),
            window_cv: rng.random_range(1..40),
            ..cfg.clone()
        };
        for (name, r) in [("NPMI", npmi_coherence(&topics, &docs, &small)), ("C_V", cv_coherence(&topics, &docs, &small))] {
            if let Ok(s) = r {
                scored += 1;
                ensure((-1.0..=1.0).contains(&s.value), || format!("case {case}: {name} {} out of range", s.value))?;
            }
        }
    }
    Ok(format!("NPMI={npmi:.4}; C_V identical={cv:.4}; {scored} random scores within [-1, 1]"))
}

fn selection_logic() -> Outcome {
    // Per-domain winners: (n_components, K, algorithm, CHI, DBI, SIL, C_V, C_NPMI),
    // all sentence embeddings reduced with UMAP.
    let rows: [(usize, usize, &str, f64, f64, f64, f64, f64); 8] = [
        (10, 3, "K-Means", 310.29, 1.02, 0.58, 0.47, -0.27),
        (15, 10, "K-Means", 129.48, 1.07, 0.51, 0.45, -0.26),
        (5, 4, "Fuzzy", 406.23, 0.91, 0.57, 0.73, -0.21),
        (15, 9, "Agglomerative", 145.65, 0.93, 0.48, 0.47, -0.21),
        (10, 6, "Agglomerative", 105.21, 0.98, 0.47, 0.38, -0.28),
        (10, 10, "Agglomerative", 65.97, 0.98, 0.47, 0.43, -0.21),
        (10, 4, "Agglomerative", 528.42, 0.80, 0.59, 0.58, -0.18),
        (10, 11, "K-Means", 123.94, 0.86, 0.59, 0.38, -0.28),
    ];
    let mut winners = Vec::new();
    for (n, k, alg, chi, dbi, sil, cv, npmi) in rows {
        winners.push((
            ConfigTuple {
                representation: "MiniLM".parse().map_err(|e: String| e)?,
                reducer: ReductionMethod::Umap,
                n_components: n,
                algorithm: alg.parse().map_err(|e: String| e)?,
                k,
            },
            SweepMetrics::from_values(chi, dbi, sil, cv, npmi),
        ));
    }
    let d = component_frequency_default(&winners).map_err(|e| e.to_string())?;
    let got = (d.representation, d.reducer, d.n_components, d.algorithm);
    ensure(
        got == (Representation::External, ReductionMethod::Umap, 10, ClusterAlgorithm::AgglomerativeWard),
        || format!("default {got:?}"),
    )?;
    Ok(format!(
        "default = ({}, {}, {}, {}); algorithm support {:?}",
        d.representation.as_str(),
        d.reducer.as_str(),
        d.n_components,
        d.algorithm.as_str(),
        d.support["algorithm"]
    ))
}

fn end_to_end() -> Outcome {
    let started = Instant::now();
    // The hashed encoder keeps the run offline whatever the environment says.
    let cfg = PipelineConfig {
        representation: RepresentationConfig::of(Representation::Hashed),
        ..PipelineConfig::default()
    }
    .with_seed(7);
    let run = || {
        Explorer::new(Arc::new(ArxivClient::fixture(fixture_dir())))
            .run_pipeline(&fixture_spec(), &cfg)
            .map_err(|e| e.to_string())
    };
    let a = run()?;
    let b = run()?;
    let elapsed = started.elapsed();
    ensure(a.stable_json() == b.stable_json(), || "two runs differ".into())?;
    let n = a.snapshot.n_papers;
    ensure(n == 60, || format!("{n} papers in the fixture"))?;

    let mut seen: Vec<&str> = a.clusters.iter().flat_map(|t| t.papers.iter().map(|p| p.arxiv_id.as_str())).collect();
    seen.sort_unstable();
    let listed = seen.len();
    seen.dedup();
    ensure(listed == n && seen.len() == n, || format!("{listed} listings, {} distinct, {n} papers", seen.len()))?;
    ensure(a.clusters.iter().all(|t| t.size == t.papers.len()), || "tab size disagrees with its listing".into())?;

    let per_cluster: usize = a.trends.clusters.iter().map(|c| c.total).sum();
    ensure(a.trends.total() == n && per_cluster == n && a.trends.points.len() == n, || {
        format!("trend counts {} / totals {per_cluster} / points {}", a.trends.total(), a.trends.points.len())
    })?;
    within(elapsed, 30)?;
    Ok(format!(
        "{} clusters + {} uncategorized over {n} papers; identical JSON twice; {:.2}s",
        a.assignment.n_clusters,
        a.assignment.noise_count(),
        elapsed.as_secs_f64()
    ))
}

fn sweep_harness() -> Outcome {
    let started = Instant::now();
    let snapshot = ArxivClient::fixture(fixture_dir()).fetch(&fixture_spec()).map_err(|e| e.to_string())?;
    let corpus = SweepCorpus::from_snapshot("fixture", &snapshot).map_err(|e| e.to_string())?;
    let grid = SweepGrid::full(&[Representation::Tfidf, Representation::Hashed]);

    let mut tables = Vec::new();
    for _ in 0..2 {
        let records = run_sweep(&corpus, &grid, &SweepOptions::default()).map_err(|e| e.to_string())?;
        ensure(records.len() == 396, || format!("{} records", records.len()))?;
        let failed = records.iter().filter(|r| r.error.is_some()).count();
        ensure(failed == 0, || format!("{failed} configs failed"))?;
        tables.push(rank_aggregate(records).map_err(|e| e.to_string())?);
    }
    let (t, again) = (&tables[0], &tables[1]);
    let order = |t: &eliot_core::sweep::RankTable| t.records.iter().map(|r| r.config).collect::<Vec<_>>();
    ensure(order(t) == order(again), || "ranking differs between runs".into())?;
    ensure(t.winner().config == again.winner().config, || "winner differs between runs".into())?;

    for r in &t.records {
        let ranks = r.ranks.as_ref().ok_or("record without ranks")?;
        ensure(r.aggregate == Some(ranks.sum()), || format!("{}: aggregate is not the rank sum", r.config))?;
    }
    // The winner is unique under the total order (aggregate, tie score, config).
    let key = |i: usize| (t.records[i].aggregate.unwrap_or(f64::INFINITY), -t.tie_scores[i], t.records[i].config);
    ensure((1..t.records.len()).all(|i| key(i - 1) < key(i)), || "ranking is not strict".into())?;
    let decided_by = if t.records[0].aggregate < t.records[1].aggregate {
        "aggregate"
    } else if t.tie_scores[0] > t.tie_scores[1] {
        "normalized score"
    } else {
        "config order"
    };

    let mut buf = Vec::new();
    write_csv(&mut buf, &tables[..1]).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(&buf[..]);
    let headers: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    ensure(headers == CSV_COLUMNS, || format!("CSV headers {headers:?}"))?;
    let mut lines = 0;
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        ensure(rec.len() == CSV_COLUMNS.len(), || format!("row with {} fields", rec.len()))?;
        for col in 6..CSV_COLUMNS.len() {
            ensure(rec[col].parse::<f64>().is_ok(), || format!("column {} not numeric: {:?}", CSV_COLUMNS[col], &rec[col]))?;
        }
        lines += 1;
    }
    ensure(lines == 396, || format!("{lines} CSV rows"))?;
    let elapsed = started.elapsed();
    within(elapsed, 600)?;
    let w = t.winner();
    Ok(format!(
        "396 configs x2, winner {} (aggregate {}, decided by {decided_by}); CSV 396 rows; {:.1}s",
        w.config,
        w.aggregate.unwrap_or(f64::NAN),
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("metric oracles", metric_oracles),
        ("clustering recovery", clustering_recovery),
        ("UMAP sanity", umap_sanity),
        ("c-TF-IDF", ctfidf_checks),
        ("coherence", coherence_checks),
        ("default selection", selection_logic),
        ("end-to-end determinism", end_to_end),
        ("sweep harness", sweep_harness),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
