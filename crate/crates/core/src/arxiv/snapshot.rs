use super::{ArxivError, PaperRecord, QuerySpec};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotSource {
    Live,
    Fixture,
}

/// A persisted retrieval: the query plus the papers it returned, in API order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSnapshot {
    pub query: QuerySpec,
    pub fetched_at: DateTime<Utc>,
    pub source: SnapshotSource,
    pub papers: Vec<PaperRecord>,
}

impl CorpusSnapshot {
    pub fn validate(&self) -> Result<(), ArxivError> {
        let mut seen = HashSet::new();
        for p in &self.papers {
            if !seen.insert(p.arxiv_id.as_str()) {
                return Err(ArxivError::InvalidQuery(format!("duplicate paper {}", p.arxiv_id)));
            }
            p.validate().map_err(ArxivError::InvalidQuery)?;
        }
        if self.papers.len() > self.query.max_results {
            return Err(ArxivError::InvalidQuery(format!(
                "{} papers exceed max_results {}",
                self.papers.len(),
                self.query.max_results
            )));
        }
        Ok(())
    }

    /// Content hash over query and papers; `fetched_at` and `source` are excluded.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.query).expect("query serializes"));
        h.update(serde_json::to_vec(&self.papers).expect("papers serialize"));
        h.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ArxivError> {
        let bytes = std::fs::read(path)?;
        let snap: CorpusSnapshot = serde_json::from_slice(&bytes)?;
        snap.validate()?;
        Ok(snap)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ArxivError> {
        let json = serde_json::to_vec_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }
}
