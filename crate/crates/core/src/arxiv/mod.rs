//! arXiv retrieval: query construction, Atom parsing, paginated and
//! rate-limited fetching, latest-version deduplication and snapshots.

mod atom;
mod client;
mod query;
mod snapshot;
mod transport;

pub use atom::{parse_atom, AtomFeed};
pub use client::{fetch_corpus, ArxivClient, ClientConfig, RateLimiter};
pub use query::{build_query_string, date_window_clause, QuerySpec, SortOrder, MAX_RESULTS_RANGE};
pub use snapshot::{CorpusSnapshot, SnapshotSource};
pub use transport::{
    query_hash, Clock, FixtureTransport, HttpResponse, HttpTransport, ManualClock, SystemClock,
    Transport, TransportError,
};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, thiserror::Error)]
pub enum ArxivError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("retrieval failed after {attempts} attempt(s) (last status: {})", status.map(|s| s.to_string()).unwrap_or_else(|| "none".into()))]
    Retrieval {
        status: Option<u16>,
        attempts: usize,
        message: String,
    },
    #[error("malformed feed at byte {offset}: {message}")]
    Parse { offset: u64, message: String },
    #[error("arXiv API error: {0}")]
    Api(String),
    #[error("snapshot I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// One arXiv paper at a specific version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    /// Base identifier without the version suffix, e.g. `2401.01234`.
    pub arxiv_id: String,
    pub version: u32,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub authors: Vec<String>,
    pub categories: Vec<String>,
    pub published: DateTime<Utc>,
    pub updated: DateTime<Utc>,
    pub url: String,
}

impl PaperRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.arxiv_id.trim().is_empty() {
            return Err("empty arxiv_id".into());
        }
        if self.version == 0 {
            return Err(format!("{}: version must be >= 1", self.arxiv_id));
        }
        if self.published > self.updated {
            return Err(format!("{}: published after updated", self.arxiv_id));
        }
        if self.title.trim().is_empty() || self.abstract_text.trim().is_empty() {
            return Err(format!("{}: empty title or abstract", self.arxiv_id));
        }
        Ok(())
    }
}

/// Keeps one record per `arxiv_id`: the highest version, ties going to the
/// later `updated` timestamp. Survivors keep the position of the first
/// occurrence of their id.
pub fn dedupe_latest(papers: Vec<PaperRecord>) -> Vec<PaperRecord> {
    let mut slot_of: HashMap<String, usize> = HashMap::with_capacity(papers.len());
    let mut out: Vec<PaperRecord> = Vec::with_capacity(papers.len());
    for paper in papers {
        match slot_of.get(&paper.arxiv_id) {
            Some(&slot) => {
                let best = &out[slot];
                let newer = (paper.version, paper.updated) > (best.version, best.updated);
                if newer {
                    out[slot] = paper;
                }
            }
            None => {
                slot_of.insert(paper.arxiv_id.clone(), out.len());
                out.push(paper);
            }
        }
    }
    out
}
