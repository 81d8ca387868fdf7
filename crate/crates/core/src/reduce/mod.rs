//! Dimensionality reduction: truncated SVD and a from-scratch UMAP.

mod knn;
mod svd;
mod umap;

pub use knn::{fuzzy_union, knn_graph, pairwise_distances, FuzzyGraph, NeighborGraph};
pub use svd::{truncated_svd, SvdFactors};
pub use umap::{fit_ab, umap_embed, umap_embed_traced, InitKind, UmapTrace};

use crate::exec::Execution;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReduceError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMethod {
    Svd,
    Umap,
}

impl ReductionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ReductionMethod::Svd => "svd",
            ReductionMethod::Umap => "umap",
        }
    }
}

impl std::str::FromStr for ReductionMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "svd" => Ok(ReductionMethod::Svd),
            "umap" => Ok(ReductionMethod::Umap),
            other => Err(format!("unknown reducer {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    Cosine,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub metric: DistanceMetric,
    pub seed: u64,
}

impl Default for UmapParams {
    fn default() -> Self {
        UmapParams {
            n_neighbors: 15,
            min_dist: 0.1,
            spread: 1.0,
            n_epochs: 200,
            negative_sample_rate: 5,
            metric: DistanceMetric::Cosine,
            seed: 42,
        }
    }
}

impl UmapParams {
    pub fn validate(&self) -> Result<(), ReduceError> {
        if self.n_neighbors < 2 {
            return Err(ReduceError::InvalidParams("n_neighbors must be >= 2".into()));
        }
        if !(self.min_dist >= 0.0 && self.min_dist < self.spread) {
            return Err(ReduceError::InvalidParams(format!(
                "need 0 <= min_dist < spread, got {} / {}",
                self.min_dist, self.spread
            )));
        }
        if self.n_epochs == 0 {
            return Err(ReduceError::InvalidParams("n_epochs must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub method: ReductionMethod,
    pub n_components: usize,
    #[serde(default)]
    pub umap: UmapParams,
}

impl ReductionConfig {
    pub fn svd(n_components: usize) -> Self {
        ReductionConfig {
            method: ReductionMethod::Svd,
            n_components,
            umap: UmapParams::default(),
        }
    }

    pub fn umap(n_components: usize) -> Self {
        ReductionConfig {
            method: ReductionMethod::Umap,
            n_components,
            umap: UmapParams::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.umap.seed = seed;
        self
    }
}

/// Rows are documents, columns the reduced coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    pub values: Array2<f64>,
    pub method: ReductionMethod,
    pub config: ReductionConfig,
}

impl ReducedMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dims(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Dispatches on `cfg.method`.
pub fn reduce(x: &Array2<f64>, cfg: &ReductionConfig, exec: Execution) -> Result<ReducedMatrix, ReduceError> {
    match cfg.method {
        ReductionMethod::Svd => {
            let factors = truncated_svd(x, cfg.n_components)?;
            Ok(ReducedMatrix {
                values: factors.scores,
                method: ReductionMethod::Svd,
                config: cfg.clone(),
            })
        }
        ReductionMethod::Umap => umap_embed(x, cfg, exec),
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(UmapParams::default().validate().is_ok());
        let p = UmapParams { n_neighbors: 1, ..UmapParams::default() };
        assert!(p.validate().is_err());
        let p = UmapParams { min_dist: 1.0, ..UmapParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn config_serde_roundtrip() {
        let cfg = ReductionConfig::umap(10).with_seed(7);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"method\":\"umap\""));
        let back: ReductionConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        let partial: ReductionConfig = serde_json::from_str(r#"{"method":"svd","n_components":5}"#).unwrap();
        assert_eq!(partial.umap, UmapParams::default());
    }

    #[test]
    fn reduce_keeps_row_count() {
        let (x, _) = test_support::blobs(10, 2, 8, 5.0, 0.5, 1);
        for cfg in [ReductionConfig::svd(3), ReductionConfig::umap(3)] {
            let r = reduce(&x, &cfg, Execution::Sequential).unwrap();
            assert_eq!(r.rows(), 20);
            assert_eq!(r.dims(), 3);
            assert!(r.is_finite());
        }
    }
}
