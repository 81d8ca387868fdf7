//! Flat-file cache of corpus snapshots and exploration results.
//!
//! Layout: `<dir>/results/<key>.json` and `<dir>/snapshots/<key>.json`.
//! Writes go to a temporary file in the same directory and are renamed into
//! place, so readers never observe a partial entry.

use super::{ExplorationResult, PipelineConfig};
use crate::arxiv::{CorpusSnapshot, QuerySpec};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime};

#[derive(Debug, Clone)]
pub struct ResultCache {
    dir: PathBuf,
    ttl: Option<Duration>,
}

fn sha_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Stable key over the query and the full pipeline configuration (seeds
/// included).
pub fn result_key(spec: &QuerySpec, cfg: &PipelineConfig) -> String {
    let body = serde_json::to_vec(&(spec, cfg)).expect("spec and config serialize");
    sha_hex(&body)[..32].to_string()
}

pub fn snapshot_key(spec: &QuerySpec) -> String {
    sha_hex(&serde_json::to_vec(spec).expect("spec serializes"))[..32].to_string()
}

fn valid_key(key: &str) -> bool {
    !key.is_empty() && key.len() <= 64 && key.chars().all(|c| c.is_ascii_hexdigit())
}

impl ResultCache {
    /// Entries never expire unless a TTL is set.
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResultCache { dir: dir.into(), ttl: None }
    }

    pub fn with_ttl(mut self, ttl: Option<Duration>) -> Self {
        self.ttl = ttl;
        self
    }

    /// Cache rooted at `ELIOT_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os("ELIOT_CACHE_DIR").filter(|d| !d.is_empty()).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, kind: &str, key: &str) -> PathBuf {
        self.dir.join(kind).join(format!("{key}.json"))
    }

    fn expired(&self, path: &Path) -> bool {
        let Some(ttl) = self.ttl else { return false };
        let modified = std::fs::metadata(path).and_then(|m| m.modified());
        match modified {
            Ok(t) => SystemTime::now().duration_since(t).unwrap_or_default() > ttl,
            Err(_) => true,
        }
    }

    fn read<T: DeserializeOwned>(&self, kind: &str, key: &str) -> Option<T> {
        if !valid_key(key) {
            return None;
        }
        let path = self.path(kind, key);
        let bytes = std::fs::read(&path).ok()?;
        if self.expired(&path) {
            return None;
        }
        match serde_json::from_slice(&bytes) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("evicting corrupt cache entry {}: {e}", path.display());
                if let Err(e) = std::fs::remove_file(&path) {
                    log::warn!("could not remove {}: {e}", path.display());
                }
                None
            }
        }
    }

    fn write<T: Serialize>(&self, kind: &str, key: &str, value: &T) -> std::io::Result<()> {
        let target = self.path(kind, key);
        let parent = target.parent().expect("entry path has a parent");
        std::fs::create_dir_all(parent)?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
        serde_json::to_writer(&mut tmp, value)?;
        tmp.flush()?;
        tmp.persist(&target).map_err(|e| e.error)?;
        Ok(())
    }

    /// Stored result by key, marked as cached.
    pub fn get(&self, key: &str) -> Option<ExplorationResult> {
        self.read::<ExplorationResult>("results", key).map(|mut r| {
            r.cached = true;
            r
        })
    }

    pub fn put(&self, result: &ExplorationResult) -> std::io::Result<()> {
        let mut stored = result.clone();
        stored.cached = false;
        self.write("results", &result.result_id, &stored)
    }

    pub fn get_snapshot(&self, spec: &QuerySpec) -> Option<CorpusSnapshot> {
        self.read("snapshots", &snapshot_key(spec))
    }

    pub fn put_snapshot(&self, snapshot: &CorpusSnapshot) -> std::io::Result<()> {
        self.write("snapshots", &snapshot_key(&snapshot.query), snapshot)
    }
}
