//! Intrinsic clustering metrics and keyword coherence.

mod coherence;
mod intrinsic;

pub use coherence::{cv_coherence, npmi_coherence, CoherenceConfig, CoherenceScore};
pub use intrinsic::{calinski_harabasz, davies_bouldin, silhouette};

use crate::cluster::ClusterAssignment;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricError {
    #[error("metric undefined: {0}")]
    Undefined(String),
    #[error("invalid metric parameter: {0}")]
    InvalidParams(String),
}

/// A metric value, an infinite sentinel, or the reason it is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Metric {
    Ok { value: f64 },
    Infinite,
    Undefined { reason: String },
}

impl Metric {
    pub fn value(v: f64) -> Self {
        Metric::Ok { value: v }
    }

    /// Finite value if present.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Metric::Ok { value } => Some(*value),
            _ => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        !matches!(self, Metric::Undefined { .. })
    }

    fn from_result(r: Result<Metric, MetricError>) -> Self {
        r.unwrap_or_else(|e| Metric::Undefined { reason: e.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpace {
    Reduced,
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub sil: Metric,
    pub chi: Metric,
    pub dbi: Metric,
    pub c_v: Metric,
    pub c_npmi: Metric,
    pub n_clusters: usize,
    pub n_noise: usize,
    pub space: MetricSpace,
    pub coherence: CoherenceConfig,
    /// Keyword pairs (NPMI) plus words (C_V) absent from the corpus.
    pub missing_terms: usize,
}

/// Intrinsic metrics over non-noise rows of `x`: (SIL, CHI, DBI).
pub fn intrinsic_metrics(x: &Array2<f64>, labels: &[i64]) -> (Metric, Metric, Metric) {
    (
        Metric::from_result(silhouette(x, labels).map(Metric::value)),
        Metric::from_result(calinski_harabasz(x, labels)),
        Metric::from_result(davies_bouldin(x, labels)),
    )
}

/// Coherence of `topics` over `docs`: (C_V, C_NPMI, missing-term tally).
pub fn coherence_metrics(topics: &[Vec<String>], docs: &[Vec<&str>], cfg: &CoherenceConfig) -> (Metric, Metric, usize) {
    if topics.is_empty() {
        let reason = "no cluster keywords".to_string();
        return (Metric::Undefined { reason: reason.clone() }, Metric::Undefined { reason }, 0);
    }
    let mut missing = 0;
    let mut lift = |r: Result<CoherenceScore, MetricError>| match r {
        Ok(s) => {
            missing += s.missing_terms;
            Metric::value(s.value)
        }
        Err(e) => Metric::Undefined { reason: e.to_string() },
    };
    let cv = lift(cv_coherence(topics, docs, cfg));
    let npmi = lift(npmi_coherence(topics, docs, cfg));
    (cv, npmi, missing)
}

/// Full report for one clustering of `x` with keyword `topics`.
pub fn evaluate(
    x: &Array2<f64>,
    assignment: &ClusterAssignment,
    topics: &[Vec<String>],
    docs: &[Vec<&str>],
    cfg: &CoherenceConfig,
    space: MetricSpace,
) -> MetricReport {
    let (sil, chi, dbi) = intrinsic_metrics(x, &assignment.labels);
    let (c_v, c_npmi, missing_terms) = coherence_metrics(topics, docs, cfg);
    MetricReport {
        sil,
        chi,
        dbi,
        c_v,
        c_npmi,
        n_clusters: assignment.n_clusters,
        n_noise: assignment.noise_count(),
        space,
        coherence: cfg.clone(),
        missing_terms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_json_shape() {
        assert_eq!(serde_json::to_string(&Metric::value(0.5)).unwrap(), r#"{"status":"ok","value":0.5}"#);
        assert_eq!(serde_json::to_string(&Metric::Infinite).unwrap(), r#"{"status":"infinite"}"#);
        let u = Metric::Undefined { reason: "x".into() };
        let back: Metric = serde_json::from_str(&serde_json::to_string(&u).unwrap()).unwrap();
        assert_eq!(back, u);
        assert!(!u.is_defined());
        assert!(Metric::Infinite.is_defined());
    }

    #[test]
    fn single_cluster_report_is_undefined_not_panicking() {
        let x = Array2::from_shape_vec((3, 1), vec![0.0, 1.0, 2.0]).unwrap();
        let (sil, chi, dbi) = intrinsic_metrics(&x, &[0, 0, 0]);
        assert!(!sil.is_defined() && !chi.is_defined() && !dbi.is_defined());
        let (cv, npmi, _) = coherence_metrics(&[], &[], &CoherenceConfig::default());
        assert!(!cv.is_defined() && !npmi.is_defined());
    }
}
