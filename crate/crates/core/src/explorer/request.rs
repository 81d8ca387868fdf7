//! The explore request shared by the HTTP API and the command line.

use super::{PipelineConfig, PipelineError};
use crate::arxiv::{QuerySpec, SortOrder};
use crate::cluster::{ClusterAlgorithm, ClusterMode};
use crate::reduce::ReductionMethod;
use crate::text::{Representation, RepresentationConfig};
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// A list of phrases, or a single comma-separated string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Terms {
    List(Vec<String>),
    Joined(String),
}

impl Terms {
    pub fn phrases(&self) -> Vec<String> {
        match self {
            Terms::List(v) => v.iter().flat_map(|t| QuerySpec::parse_terms(t)).collect(),
            Terms::Joined(s) => QuerySpec::parse_terms(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryInput {
    pub terms: Terms,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// `YYYY-MM-DD` or `YYYY-MM` (first day of the month).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_start: Option<String>,
    /// `YYYY-MM-DD` or `YYYY-MM` (last day of the month).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_end: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_results: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<SortOrder>,
}

/// Run options; anything unset keeps the default configuration's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExploreOptions {
    /// Automatic unless a K is given.
    pub mode: Option<ClusterMode>,
    pub k: Option<usize>,
    pub max_results: Option<usize>,
    pub sort: Option<SortOrder>,
    pub algorithm: Option<ClusterAlgorithm>,
    pub representation: Option<Representation>,
    pub reducer: Option<ReductionMethod>,
    pub n_components: Option<usize>,
    pub top_n: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreRequest {
    pub query: QueryInput,
    #[serde(default)]
    pub config: ExploreOptions,
}

/// Parses a date bound; a bare month resolves to its first day, or to its
/// last day when `end` is set.
pub fn parse_date_bound(s: &str, end: bool) -> Result<NaiveDate, String> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d);
    }
    let first = NaiveDate::parse_from_str(&format!("{s}-01"), "%Y-%m-%d").map_err(|_| format!("bad date {s:?}"))?;
    if !end {
        return Ok(first);
    }
    let (y, m) = if first.month() == 12 { (first.year() + 1, 1) } else { (first.year(), first.month() + 1) };
    Ok(NaiveDate::from_ymd_opt(y, m, 1).expect("valid month start").pred_opt().expect("has predecessor"))
}

impl ExploreRequest {
    /// Resolves the request against `base` into a query and a full configuration.
    pub fn resolve(&self, base: &PipelineConfig) -> Result<(QuerySpec, PipelineConfig), PipelineError> {
        let bad = PipelineError::InvalidConfig;
        let q = &self.query;
        let c = &self.config;
        let date = |s: &Option<String>, end| s.as_deref().map(|s| parse_date_bound(s, end)).transpose().map_err(bad);
        let mut spec = QuerySpec::new(q.terms.phrases()).with_dates(date(&q.date_start, false)?, date(&q.date_end, true)?);
        spec.category = q.category.clone().filter(|c| !c.trim().is_empty());
        spec.max_results = c.max_results.or(q.max_results).unwrap_or(spec.max_results);
        spec.sort = c.sort.or(q.sort).unwrap_or_default();
        spec.validate().map_err(|e| bad(e.to_string()))?;

        let mode = c.mode.unwrap_or(if c.k.is_some() { ClusterMode::UserControlled } else { ClusterMode::Automatic });
        let mut cfg = base.clone();
        match mode {
            ClusterMode::Automatic => {
                if let Some(a) = c.algorithm.filter(|a| a.mode() != ClusterMode::Automatic) {
                    return Err(bad(format!("{} is not an automatic-mode algorithm", a.as_str())));
                }
                cfg.clustering.algorithm = ClusterAlgorithm::Hdbscan;
                cfg.clustering.k = None;
            }
            ClusterMode::UserControlled => {
                let k = c.k.ok_or_else(|| bad("user-controlled mode needs k".into()))?;
                let algorithm = c.algorithm.unwrap_or(if base.mode() == ClusterMode::UserControlled {
                    base.clustering.algorithm
                } else {
                    ClusterAlgorithm::AgglomerativeWard
                });
                if algorithm.mode() != ClusterMode::UserControlled {
                    return Err(bad(format!("{} does not take k", algorithm.as_str())));
                }
                cfg.clustering.algorithm = algorithm;
                cfg.clustering.k = Some(k);
            }
        }
        if let Some(kind) = c.representation.filter(|k| *k != cfg.representation.kind) {
            cfg.representation = RepresentationConfig {
                kind,
                ..cfg.representation
            };
        }
        if let Some(r) = c.reducer {
            cfg.reduction.method = r;
        }
        if let Some(n) = c.n_components {
            cfg.reduction.n_components = n;
        }
        if let Some(n) = c.top_n {
            cfg.labeling.top_n = n;
            cfg.coherence.top_n = n;
        }
        if let Some(seed) = c.seed {
            cfg = cfg.with_seed(seed);
        }
        cfg.validate()?;
        Ok((spec, cfg))
    }
}
