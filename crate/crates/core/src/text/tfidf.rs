use super::{content_tokens, l2_normalize_rows, ngrams, DocumentMatrix, PreprocessedDoc, Representation, RowNorm, TextError};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfParams {
    /// Minimum number of documents a term must occur in.
    pub min_df: usize,
    /// Maximum fraction of documents a term may occur in.
    pub max_df: f64,
    pub max_features: usize,
    /// Inclusive word n-gram orders.
    pub ngram_range: (usize, usize),
    /// Drop stopwords, letterless and single-character tokens before n-gramming.
    pub filter_tokens: bool,
}

impl Default for TfidfParams {
    fn default() -> Self {
        TfidfParams {
            min_df: 3,
            max_df: 0.7,
            max_features: 3000,
            ngram_range: (1, 3),
            filter_tokens: true,
        }
    }
}

impl TfidfParams {
    pub fn validate(&self) -> Result<(), TextError> {
        let (lo, hi) = self.ngram_range;
        if self.min_df < 1 || !(self.max_df > 0.0 && self.max_df <= 1.0) || lo < 1 || lo > hi || self.max_features < 1 {
            return Err(TextError::InvalidParams(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Fitted vocabulary (term -> column, columns in lexicographic term order)
/// and smoothed idf weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub document_frequency: Vec<usize>,
}

fn doc_terms(doc: &PreprocessedDoc, params: &TfidfParams) -> Vec<String> {
    let (lo, hi) = params.ngram_range;
    if params.filter_tokens {
        ngrams(&content_tokens(doc), lo, hi)
    } else {
        let toks: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        ngrams(&toks, lo, hi)
    }
}

/// Fits TF-IDF with `idf = ln((1 + n) / (1 + df)) + 1` over raw term
/// counts and L2-normalizes each row.
pub fn fit_tfidf(docs: &[PreprocessedDoc], params: &TfidfParams) -> Result<(TfidfModel, DocumentMatrix), TextError> {
    params.validate()?;
    let n = docs.len();
    if n < 2 {
        return Err(TextError::InvalidParams(format!("TF-IDF needs at least 2 documents, got {n}")));
    }
    let per_doc: Vec<HashMap<String, usize>> = docs
        .iter()
        .map(|d| {
            let mut counts = HashMap::new();
            for term in doc_terms(d, params) {
                *counts.entry(term).or_insert(0usize) += 1;
            }
            counts
        })
        .collect();

    let mut df: HashMap<&str, usize> = HashMap::new();
    let mut total: HashMap<&str, usize> = HashMap::new();
    for counts in &per_doc {
        for (term, &c) in counts {
            *df.entry(term.as_str()).or_insert(0) += 1;
            *total.entry(term.as_str()).or_insert(0) += c;
        }
    }

    let after_min: Vec<&str> = df.iter().filter(|(_, &d)| d >= params.min_df).map(|(t, _)| *t).collect();
    if after_min.is_empty() {
        return Err(TextError::DegenerateVocabulary { filter: "min_df" });
    }
    let ceiling = params.max_df * n as f64;
    let mut kept: Vec<&str> = after_min.into_iter().filter(|t| df[t] as f64 <= ceiling + 1e-12).collect();
    if kept.is_empty() {
        return Err(TextError::DegenerateVocabulary { filter: "max_df" });
    }
    kept.sort_by(|a, b| total[b].cmp(&total[a]).then_with(|| a.cmp(b)));
    kept.truncate(params.max_features);
    kept.sort_unstable();

    let vocabulary: BTreeMap<String, usize> = kept.iter().enumerate().map(|(i, t)| (t.to_string(), i)).collect();
    let document_frequency: Vec<usize> = kept.iter().map(|t| df[t]).collect();
    let idf: Vec<f64> = document_frequency
        .iter()
        .map(|&d| ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0)
        .collect();

    let mut values = Array2::<f64>::zeros((n, kept.len()));
    for (row, counts) in per_doc.iter().enumerate() {
        for (term, &c) in counts {
            if let Some(&col) = vocabulary.get(term) {
                values[[row, col]] = c as f64 * idf[col];
            }
        }
    }
    l2_normalize_rows(&mut values);
    let model = TfidfModel {
        vocabulary,
        idf,
        document_frequency,
    };
    Ok((model, DocumentMatrix::new(values, Representation::Tfidf, RowNorm::L2)))
}

/// Distinct terms per document under `params` (used by recount checks).
#[cfg(test)]
fn document_term_sets(docs: &[PreprocessedDoc], params: &TfidfParams) -> Vec<std::collections::HashSet<String>> {
    docs.iter().map(|d| doc_terms(d, params).into_iter().collect()).collect()
}
