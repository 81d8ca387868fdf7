use super::ArxivError;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

/// Bounds of the per-query fetch limit.
pub const MAX_RESULTS_RANGE: RangeInclusive<usize> = 20..=500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    #[default]
    Relevance,
    SubmittedDate,
}

impl SortOrder {
    pub fn api_name(self) -> &'static str {
        match self {
            SortOrder::Relevance => "relevance",
            SortOrder::SubmittedDate => "submittedDate",
        }
    }
}

/// An explicit retrieval request: every term is matched against titles or
/// abstracts and all terms must match.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuerySpec {
    pub terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_start: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_end: Option<NaiveDate>,
    #[serde(default)]
    pub sort: SortOrder,
    pub max_results: usize,
}

impl QuerySpec {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        QuerySpec {
            terms: terms.into_iter().map(Into::into).collect(),
            category: None,
            date_start: None,
            date_end: None,
            sort: SortOrder::Relevance,
            max_results: 300,
        }
    }

    pub fn with_category(mut self, category: impl Into<String>) -> Self {
        self.category = Some(category.into());
        self
    }

    pub fn with_dates(mut self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Self {
        self.date_start = start;
        self.date_end = end;
        self
    }

    pub fn with_max_results(mut self, max_results: usize) -> Self {
        self.max_results = max_results;
        self
    }

    /// Splits user input on commas into trimmed, non-empty phrases.
    pub fn parse_terms(input: &str) -> Vec<String> {
        input
            .split(',')
            .map(normalize_term)
            .filter(|t| !t.is_empty())
            .collect()
    }

    pub fn validate(&self) -> Result<(), ArxivError> {
        if self.terms.is_empty() {
            return Err(ArxivError::InvalidQuery("no search terms".into()));
        }
        if self.terms.iter().any(|t| normalize_term(t).is_empty()) {
            return Err(ArxivError::InvalidQuery("empty search term".into()));
        }
        if !MAX_RESULTS_RANGE.contains(&self.max_results) {
            return Err(ArxivError::InvalidQuery(format!(
                "max_results {} outside {}..={}",
                self.max_results,
                MAX_RESULTS_RANGE.start(),
                MAX_RESULTS_RANGE.end()
            )));
        }
        if let (Some(a), Some(b)) = (self.date_start, self.date_end) {
            if a > b {
                return Err(ArxivError::InvalidQuery(format!("date_start {a} is after date_end {b}")));
            }
        }
        if let Some(cat) = &self.category {
            if cat.trim().is_empty() || cat.contains(char::is_whitespace) {
                return Err(ArxivError::InvalidQuery(format!("bad category {cat:?}")));
            }
        }
        Ok(())
    }

    /// True when `date` falls inside the (inclusive) query window.
    pub fn in_window(&self, date: NaiveDate) -> bool {
        self.date_start.is_none_or(|s| date >= s) && self.date_end.is_none_or(|e| date <= e)
    }
}

fn normalize_term(term: &str) -> String {
    term.replace('"', " ").split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Renders the `search_query` expression for the arXiv API.
///
/// Each term becomes `(ti:"t" OR abs:"t")`, groups are joined with `AND`,
/// then the category clause and the submission-date range are appended.
pub fn build_query_string(spec: &QuerySpec) -> Result<String, ArxivError> {
    if spec.terms.is_empty() {
        return Err(ArxivError::InvalidQuery("no search terms".into()));
    }
    let mut clauses = Vec::with_capacity(spec.terms.len() + 2);
    for raw in &spec.terms {
        let term = normalize_term(raw);
        if term.is_empty() {
            return Err(ArxivError::InvalidQuery("empty search term".into()));
        }
        clauses.push(format!("(ti:\"{term}\" OR abs:\"{term}\")"));
    }
    if let Some(cat) = spec.category.as_deref().map(str::trim) {
        if cat.contains('.') {
            clauses.push(format!("cat:{cat}"));
        } else {
            clauses.push(format!("cat:{cat}.*"));
        }
    }
    if let Some(dates) = date_window_clause(spec.date_start, spec.date_end) {
        clauses.push(dates);
    }
    Ok(clauses.join(" AND "))
}

/// `submittedDate:[YYYYMMDDHHMM TO YYYYMMDDHHMM]`, open ends widened to the
/// full archive range.
pub fn date_window_clause(start: Option<NaiveDate>, end: Option<NaiveDate>) -> Option<String> {
    if start.is_none() && end.is_none() {
        return None;
    }
    let from = start.map(|d| format!("{}0000", d.format("%Y%m%d"))).unwrap_or_else(|| "199101010000".into());
    let to = end.map(|d| format!("{}2359", d.format("%Y%m%d"))).unwrap_or_else(|| "299912312359".into());
    Some(format!("submittedDate:[{from} TO {to}]"))
}
