//! Clustering of reduced document vectors: K-Means, Ward agglomerative and
//! Fuzzy C-Means at a user-chosen K, and HDBSCAN with a noise group.

mod fcm;
mod hdbscan;
mod kmeans;
mod ward;

pub use fcm::fuzzy_cmeans;
pub use hdbscan::{core_distances, hdbscan, hdbscan_defaults, mutual_reachability};
pub use kmeans::kmeans;
pub use ward::{agglomerative_ward, ward_merges, WardMerge};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub const NOISE: i64 = -1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClusterError {
    #[error("invalid clustering parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMode {
    #[serde(alias = "auto")]
    Automatic,
    #[serde(alias = "user")]
    UserControlled,
}

impl std::str::FromStr for ClusterMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "auto" | "automatic" => Ok(ClusterMode::Automatic),
            "user" | "user_controlled" | "manual" => Ok(ClusterMode::UserControlled),
            other => Err(format!("unknown clustering mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterAlgorithm {
    Kmeans,
    AgglomerativeWard,
    FuzzyCmeans,
    Hdbscan,
}

impl ClusterAlgorithm {
    pub const USER_CONTROLLED: [ClusterAlgorithm; 3] =
        [ClusterAlgorithm::Kmeans, ClusterAlgorithm::AgglomerativeWard, ClusterAlgorithm::FuzzyCmeans];

    pub fn as_str(self) -> &'static str {
        match self {
            ClusterAlgorithm::Kmeans => "kmeans",
            ClusterAlgorithm::AgglomerativeWard => "agglomerative_ward",
            ClusterAlgorithm::FuzzyCmeans => "fuzzy_cmeans",
            ClusterAlgorithm::Hdbscan => "hdbscan",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClusterAlgorithm::Kmeans => "K-Means",
            ClusterAlgorithm::AgglomerativeWard => "Agglomerative",
            ClusterAlgorithm::FuzzyCmeans => "Fuzzy C-Means",
            ClusterAlgorithm::Hdbscan => "HDBSCAN",
        }
    }

    pub fn mode(self) -> ClusterMode {
        match self {
            ClusterAlgorithm::Hdbscan => ClusterMode::Automatic,
            _ => ClusterMode::UserControlled,
        }
    }
}

impl std::str::FromStr for ClusterAlgorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match norm.as_str() {
            "kmeans" => Ok(ClusterAlgorithm::Kmeans),
            "agglomerativeward" | "agglomerative" | "ward" => Ok(ClusterAlgorithm::AgglomerativeWard),
            "fuzzycmeans" | "fcm" | "fuzzy" => Ok(ClusterAlgorithm::FuzzyCmeans),
            "hdbscan" | "auto" | "automatic" => Ok(ClusterAlgorithm::Hdbscan),
            _ => Err(format!("unknown clustering algorithm {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    pub algorithm: ClusterAlgorithm,
    pub k: Option<usize>,
    /// Fuzzifier `m` for Fuzzy C-Means.
    pub fuzzifier: f64,
    pub min_cluster_size: Option<usize>,
    pub min_samples: Option<usize>,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            algorithm: ClusterAlgorithm::Hdbscan,
            k: None,
            fuzzifier: 2.0,
            min_cluster_size: None,
            min_samples: None,
            seed: 42,
            max_iter: 300,
            tol: 1e-5,
        }
    }
}

impl ClusteringConfig {
    pub fn user(algorithm: ClusterAlgorithm, k: usize) -> Self {
        ClusteringConfig {
            algorithm,
            k: Some(k),
            ..ClusteringConfig::default()
        }
    }

    pub fn automatic() -> Self {
        ClusteringConfig::default()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn require_k(&self, n: usize) -> Result<usize, ClusterError> {
        let k = self
            .k
            .ok_or_else(|| ClusterError::InvalidParams(format!("{} needs K", self.algorithm.as_str())))?;
        check_k(k, n)?;
        Ok(k)
    }
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<(), ClusterError> {
    if k == 0 || k > n {
        return Err(ClusterError::InvalidParams(format!("K={k} needs 1 <= K <= n={n}")));
    }
    Ok(())
}

/// Labels are canonical: clusters numbered by decreasing size with ties
/// broken by smallest member index, noise as `-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<i64>,
    pub n_clusters: usize,
    pub mode: ClusterMode,
    pub algorithm: ClusterAlgorithm,
    /// Row-stochastic memberships, columns in canonical label order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memberships: Option<Vec<Vec<f64>>>,
    /// Objective per iteration (inertia or `J_m`); empty for the others.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_history: Vec<f64>,
}

impl ClusterAssignment {
    pub(crate) fn from_raw(
        raw: &[i64],
        algorithm: ClusterAlgorithm,
        memberships: Option<Array2<f64>>,
        objective_history: Vec<f64>,
    ) -> Self {
        let (labels, mapping) = canonicalize(raw);
        let n_clusters = mapping.len();
        let memberships = memberships.map(|u| {
            // canonical columns first, then clusters left without hard members
            let mut columns: Vec<usize> = mapping.clone();
            columns.extend((0..u.ncols()).filter(|c| !mapping.contains(c)));
            u.rows().into_iter().map(|row| columns.iter().map(|&c| row[c]).collect()).collect()
        });
        ClusterAssignment {
            labels,
            n_clusters,
            mode: algorithm.mode(),
            algorithm,
            memberships,
            objective_history,
        }
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn members(&self, label: i64) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &l)| l == label).map(|(i, _)| i).collect()
    }
}

/// Renumbers non-negative labels by decreasing size, ties by smallest member
/// index. Returns the new labels and, for each new id, the raw label it came
/// from.
pub fn canonicalize(raw: &[i64]) -> (Vec<i64>, Vec<usize>) {
    let mut stats: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    for (i, &l) in raw.iter().enumerate() {
        if l >= 0 {
            let e = stats.entry(l).or_insert((0, i));
            e.0 += 1;
        }
    }
    let mut order: Vec<(i64, usize, usize)> = stats.into_iter().map(|(l, (size, first))| (l, size, first)).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let remap: std::collections::HashMap<i64, i64> = order.iter().enumerate().map(|(new, o)| (o.0, new as i64)).collect();
    let labels = raw.iter().map(|l| if *l >= 0 { remap[l] } else { NOISE }).collect();
    (labels, order.iter().map(|o| o.0 as usize).collect())
}

pub(crate) fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Runs the configured algorithm.
pub fn cluster(x: &Array2<f64>, cfg: &ClusteringConfig) -> Result<ClusterAssignment, ClusterError> {
    let n = x.nrows();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::InvalidParams("input has non-finite entries".into()));
    }
    match cfg.algorithm {
        ClusterAlgorithm::Kmeans => kmeans(x, cfg.require_k(n)?, cfg.seed, cfg.max_iter, cfg.tol),
        ClusterAlgorithm::AgglomerativeWard => agglomerative_ward(x, cfg.require_k(n)?),
        ClusterAlgorithm::FuzzyCmeans => {
            fuzzy_cmeans(x, cfg.require_k(n)?, cfg.fuzzifier, cfg.seed, cfg.max_iter, cfg.tol)
        }
        ClusterAlgorithm::Hdbscan => {
            let (mcs, ms) = hdbscan_defaults(n);
            hdbscan(x, cfg.min_cluster_size.unwrap_or(mcs), cfg.min_samples.or(cfg.min_cluster_size).unwrap_or(ms))
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Isotropic 2-d blobs around the given centres.
    pub fn blobs(centres: &[(f64, f64)], per: usize, sd: f64, seed: u64) -> (Array2<f64>, Vec<i64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sd).unwrap();
        let mut x = Array2::zeros((centres.len() * per, 2));
        let mut truth = Vec::new();
        for (c, &(cx, cy)) in centres.iter().enumerate() {
            for p in 0..per {
                let r = c * per + p;
                x[[r, 0]] = cx + normal.sample(&mut rng);
                x[[r, 1]] = cy + normal.sample(&mut rng);
                truth.push(c as i64);
            }
        }
        (x, truth)
    }

    /// Same partition up to renaming (noise must match exactly).
    pub fn same_partition(a: &[i64], b: &[i64]) -> bool {
        if a.len() != b.len() {
            return false;
        }
        let mut fwd = std::collections::HashMap::new();
        let mut back = std::collections::HashMap::new();
        for (&x, &y) in a.iter().zip(b) {
            if (x < 0) != (y < 0) {
                return false;
            }
            if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
                return false;
            }
        }
        true
    }

    pub fn adjusted_rand(a: &[i64], b: &[i64]) -> f64 {
        let n = a.len() as f64;
        let mut table: std::collections::HashMap<(i64, i64), f64> = Default::default();
        let mut ra: std::collections::HashMap<i64, f64> = Default::default();
        let mut rb: std::collections::HashMap<i64, f64> = Default::default();
        for (&x, &y) in a.iter().zip(b) {
            *table.entry((x, y)).or_default() += 1.0;
            *ra.entry(x).or_default() += 1.0;
            *rb.entry(y).or_default() += 1.0;
        }
        let c2 = |v: f64| v * (v - 1.0) / 2.0;
        let index: f64 = table.values().map(|&v| c2(v)).sum();
        let sa: f64 = ra.values().map(|&v| c2(v)).sum();
        let sb: f64 = rb.values().map(|&v| c2(v)).sum();
        let expected = sa * sb / c2(n);
        let max = (sa + sb) / 2.0;
        if (max - expected).abs() < 1e-12 {
            return 1.0;
        }
        (index - expected) / (max - expected)
    }
}
