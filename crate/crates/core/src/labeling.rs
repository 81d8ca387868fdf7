//! Class-based TF-IDF keywords: each cluster's documents are pooled into one
//! class document and terms are weighted by `tf · ln(1 + A / f)`.

use crate::cluster::{ClusterAssignment, NOISE};
use crate::text::{content_tokens, ngrams, PreprocessedDoc};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelingConfig {
    pub top_n: usize,
    /// Inclusive n-gram orders over stopword-filtered tokens.
    pub ngram_range: (usize, usize),
}

impl Default for LabelingConfig {
    fn default() -> Self {
        LabelingConfig {
            top_n: 10,
            ngram_range: (1, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterKeywords {
    pub cluster_id: i64,
    pub keywords: Vec<Keyword>,
    pub top_n: usize,
    #[serde(default)]
    pub uncategorized: bool,
}

impl ClusterKeywords {
    pub fn terms(&self) -> Vec<&str> {
        self.keywords.iter().map(|k| k.term.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordSet {
    /// One entry per non-noise cluster, in label order.
    pub clusters: Vec<ClusterKeywords>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncategorized: Option<ClusterKeywords>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl KeywordSet {
    /// Keyword lists in label order (noise excluded), as coherence input.
    pub fn topics(&self) -> Vec<Vec<String>> {
        self.clusters.iter().map(|c| c.keywords.iter().map(|k| k.term.clone()).collect()).collect()
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LabelingError {
    #[error("invalid labeling parameter: {0}")]
    InvalidParams(String),
}

fn rank(counts: &HashMap<String, usize>, weight: impl Fn(&str, usize) -> f64, top_n: usize) -> Vec<Keyword> {
    let mut scored: Vec<Keyword> = counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(t, &c)| Keyword {
            term: t.clone(),
            weight: weight(t, c),
        })
        .collect();
    scored.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
    scored.truncate(top_n);
    scored
}

/// c-TF-IDF keywords for every cluster. Class statistics (`A`, `f`) come
/// from non-noise clusters only; the noise group is scored against those
/// statistics with its own counts added to `f`.
pub fn ctfidf_keywords(
    docs: &[PreprocessedDoc],
    assignment: &ClusterAssignment,
    cfg: &LabelingConfig,
) -> Result<KeywordSet, LabelingError> {
    if cfg.top_n == 0 {
        return Err(LabelingError::InvalidParams("top_n must be >= 1".into()));
    }
    let (lo, hi) = cfg.ngram_range;
    if lo == 0 || lo > hi {
        return Err(LabelingError::InvalidParams(format!("bad ngram_range {:?}", cfg.ngram_range)));
    }
    if docs.len() != assignment.labels.len() {
        return Err(LabelingError::InvalidParams(format!(
            "{} documents but {} labels",
            docs.len(),
            assignment.labels.len()
        )));
    }

    let mut class_counts: BTreeMap<i64, HashMap<String, usize>> = BTreeMap::new();
    for (doc, &label) in docs.iter().zip(&assignment.labels) {
        let entry = class_counts.entry(label).or_default();
        for term in ngrams(&content_tokens(doc), lo, hi) {
            *entry.entry(term).or_insert(0) += 1;
        }
    }
    let noise_counts = class_counts.remove(&NOISE);

    if class_counts.is_empty() {
        return Ok(KeywordSet {
            clusters: Vec::new(),
            uncategorized: None,
            warning: Some("every document is uncategorized; no cluster keywords".into()),
        });
    }

    let mut f: HashMap<&str, usize> = HashMap::new();
    let mut total = 0usize;
    for counts in class_counts.values() {
        for (t, &c) in counts {
            *f.entry(t.as_str()).or_insert(0) += c;
            total += c;
        }
    }
    let a = total as f64 / class_counts.len() as f64;

    let clusters = class_counts
        .iter()
        .map(|(&id, counts)| ClusterKeywords {
            cluster_id: id,
            keywords: rank(counts, |t, tf| tf as f64 * (1.0 + a / f[t] as f64).ln(), cfg.top_n),
            top_n: cfg.top_n,
            uncategorized: false,
        })
        .collect();

    let uncategorized = noise_counts.map(|counts| ClusterKeywords {
        cluster_id: NOISE,
        keywords: rank(
            &counts,
            |t, tf| {
                let ft = f.get(t).copied().unwrap_or(0) + tf;
                tf as f64 * (1.0 + a / ft as f64).ln()
            },
            cfg.top_n,
        ),
        top_n: cfg.top_n,
        uncategorized: true,
    });

    Ok(KeywordSet {
        clusters,
        uncategorized,
        warning: None,
    })
}
