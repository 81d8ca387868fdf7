//! Window-based topic coherence (NPMI and C_V) over a tokenized reference
//! corpus. Keywords may be multi-word; a keyword is present in a window
//! when all of its tokens appear there consecutively.

use super::MetricError;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoherenceConfig {
    pub top_n: usize,
    pub window_npmi: usize,
    pub window_cv: usize,
    pub epsilon: f64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            top_n: 10,
            window_npmi: 10,
            window_cv: 110,
            epsilon: 1e-12,
        }
    }
}

impl CoherenceConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.top_n < 2 || self.window_npmi < 1 || self.window_cv < 1 || !(self.epsilon > 0.0) {
            return Err(MetricError::InvalidParams(format!("{self:?}")));
        }
        Ok(())
    }
}

/// A coherence score with the number of keyword pairs (NPMI) or words (C_V)
/// that were skipped because a keyword never occurs in the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceScore {
    pub value: f64,
    pub missing_terms: usize,
}

/// Window occurrence counts for a fixed keyword vocabulary.
pub(crate) struct WindowStats {
    windows: usize,
    single: Vec<usize>,
    joint: HashMap<(usize, usize), usize>,
}

impl WindowStats {
    fn p(&self, c: usize) -> f64 {
        c as f64 / self.windows as f64
    }

    pub(crate) fn single_count(&self, a: usize) -> usize {
        self.single[a]
    }

    pub(crate) fn joint_count(&self, a: usize, b: usize) -> usize {
        if a == b {
            return self.single[a];
        }
        *self.joint.get(&(a.min(b), a.max(b))).unwrap_or(&0)
    }

    #[cfg(test)]
    fn window_count(&self) -> usize {
        self.windows
    }

    /// NPMI with the conventions: no joint occurrence gives −1, a pair present
    /// in every window gives 1.
    fn npmi(&self, a: usize, b: usize, eps: f64) -> f64 {
        let j = self.joint_count(a, b);
        if j == 0 {
            return -1.0;
        }
        if j == self.windows {
            return 1.0;
        }
        let pj = self.p(j) + eps;
        let pa = self.p(self.single[a]);
        let pb = self.p(self.single[b]);
        ((pj / (pa * pb)).ln() / -pj.ln()).clamp(-1.0, 1.0)
    }
}

fn start_positions(doc: &[&str], term: &[&str]) -> Vec<usize> {
    if term.is_empty() || term.len() > doc.len() {
        return Vec::new();
    }
    (0..=doc.len() - term.len()).filter(|&p| doc[p..p + term.len()] == *term).collect()
}

/// Boolean sliding windows of `width` tokens; a document no longer than the
/// width counts as a single window.
pub(crate) fn window_stats(docs: &[Vec<&str>], vocab: &[Vec<&str>], width: usize) -> WindowStats {
    let v = vocab.len();
    let mut single = vec![0usize; v];
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut windows = 0usize;
    let mut present: Vec<usize> = Vec::with_capacity(v);
    for doc in docs {
        let starts: Vec<Vec<usize>> = vocab.iter().map(|t| start_positions(doc, t)).collect();
        let active: Vec<usize> = (0..v).filter(|&t| !starts[t].is_empty()).collect();
        let n_windows = if doc.len() <= width { 1 } else { doc.len() - width + 1 };
        windows += n_windows;
        if active.is_empty() {
            continue;
        }
        let span = width.min(doc.len().max(1));
        for s in 0..n_windows {
            present.clear();
            for &t in &active {
                let len = vocab[t].len();
                if len > span {
                    continue;
                }
                let last_start = s + span - len;
                let first = starts[t].partition_point(|&p| p < s);
                if first < starts[t].len() && starts[t][first] <= last_start {
                    present.push(t);
                }
            }
            for (i, &a) in present.iter().enumerate() {
                single[a] += 1;
                for &b in &present[i + 1..] {
                    *joint.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            }
        }
    }
    WindowStats { windows, single, joint }
}

struct Prepared<'a> {
    vocab: Vec<Vec<&'a str>>,
    topics: Vec<Vec<usize>>,
}

fn prepare<'a>(topics: &'a [Vec<String>], top_n: usize) -> Result<Prepared<'a>, MetricError> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut vocab = Vec::new();
    let mut ids = Vec::new();
    for topic in topics {
        if topic.len() < 2 {
            return Err(MetricError::Undefined(format!("topic with {} keyword(s); need >= 2", topic.len())));
        }
        let mut t = Vec::new();
        for kw in topic.iter().take(top_n) {
            let id = *index.entry(kw.as_str()).or_insert_with(|| {
                vocab.push(kw.split_whitespace().collect());
                vocab.len() - 1
            });
            if !t.contains(&id) {
                t.push(id);
            }
        }
        ids.push(t);
    }
    if ids.is_empty() {
        return Err(MetricError::Undefined("no topics".into()));
    }
    Ok(Prepared { vocab, topics: ids })
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Mean NPMI over unordered keyword pairs per topic, then over topics.
pub fn npmi_coherence(topics: &[Vec<String>], docs: &[Vec<&str>], cfg: &CoherenceConfig) -> Result<CoherenceScore, MetricError> {
    cfg.validate()?;
    let prep = prepare(topics, cfg.top_n)?;
    let stats = window_stats(docs, &prep.vocab, cfg.window_npmi);
    let mut missing = 0;
    let mut topic_scores = Vec::new();
    for t in &prep.topics {
        let mut pair_scores = Vec::new();
        for (i, &a) in t.iter().enumerate() {
            for &b in &t[i + 1..] {
                if stats.single_count(a) == 0 || stats.single_count(b) == 0 {
                    missing += 1;
                    continue;
                }
                pair_scores.push(stats.npmi(a, b, cfg.epsilon));
            }
        }
        if let Some(m) = mean(&pair_scores) {
            topic_scores.push(m);
        }
    }
    let value = mean(&topic_scores).ok_or_else(|| MetricError::Undefined("no keyword pair occurs in the corpus".into()))?;
    Ok(CoherenceScore {
        value,
        missing_terms: missing,
    })
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// C_V: each word's NPMI context vector against the topic's words, compared
/// by cosine to the sum of all context vectors (one-vs-all segmentation).
pub fn cv_coherence(topics: &[Vec<String>], docs: &[Vec<&str>], cfg: &CoherenceConfig) -> Result<CoherenceScore, MetricError> {
    cfg.validate()?;
    let prep = prepare(topics, cfg.top_n)?;
    let stats = window_stats(docs, &prep.vocab, cfg.window_cv);
    let mut missing = 0;
    let mut topic_scores = Vec::new();
    for t in &prep.topics {
        let words: Vec<usize> = t.iter().copied().filter(|&w| stats.single_count(w) > 0).collect();
        missing += t.len() - words.len();
        if words.len() < 2 {
            continue;
        }
        let vectors: Vec<Vec<f64>> = words
            .iter()
            .map(|&w| words.iter().map(|&u| stats.npmi(w, u, cfg.epsilon)).collect())
            .collect();
        let total: Vec<f64> = (0..words.len()).map(|j| vectors.iter().map(|v| v[j]).sum()).collect();
        let sims: Vec<f64> = vectors.iter().map(|v| cosine(v, &total)).collect();
        topic_scores.push(mean(&sims).expect("non-empty"));
    }
    let value = mean(&topic_scores).ok_or_else(|| MetricError::Undefined("no topic has two keywords in the corpus".into()))?;
    Ok(CoherenceScore {
        value,
        missing_terms: missing,
    })
}
