//! HTTP transports and clocks. Both are traits so tests can replay fixture
//! feeds and observe request spacing without sleeping.

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("transport: {0}")]
pub struct TransportError(pub String);

pub trait Transport: Send + Sync {
    fn get(&self, url: &str, params: &[(String, String)]) -> Result<HttpResponse, TransportError>;

    /// True when responses come from recorded files rather than the network.
    fn is_fixture(&self) -> bool {
        false
    }
}

/// Blocking HTTP transport backed by `ureq`.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .user_agent(concat!("eliot/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        HttpTransport { agent }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str, params: &[(String, String)]) -> Result<HttpResponse, TransportError> {
        let mut req = self.agent.get(url);
        for (k, v) in params {
            req = req.query(k, v);
        }
        let mut resp = req.call().map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .with_config()
            .limit(64 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

/// First 16 hex chars of SHA-256 over the `search_query` expression.
pub fn query_hash(search_query: &str) -> String {
    let digest = Sha256::digest(search_query.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Serves Atom files from a directory. The first page of a query lives in
/// `<query_hash>.xml`; later pages, if recorded, in `<query_hash>.<start>.xml`.
/// A missing later page reads as an empty feed.
pub struct FixtureTransport {
    dir: PathBuf,
}

impl FixtureTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureTransport { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn page_path(&self, search_query: &str, start: usize) -> PathBuf {
        let key = query_hash(search_query);
        if start == 0 {
            self.dir.join(format!("{key}.xml"))
        } else {
            self.dir.join(format!("{key}.{start}.xml"))
        }
    }
}

const EMPTY_FEED: &[u8] = br#"<?xml version="1.0" encoding="UTF-8"?><feed xmlns="http://www.w3.org/2005/Atom"></feed>"#;

impl Transport for FixtureTransport {
    fn get(&self, _url: &str, params: &[(String, String)]) -> Result<HttpResponse, TransportError> {
        let lookup = |k: &str| params.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let query = lookup("search_query").ok_or_else(|| TransportError("missing search_query".into()))?;
        let start: usize = lookup("start").and_then(|s| s.parse().ok()).unwrap_or(0);
        let path = self.page_path(query, start);
        match std::fs::read(&path) {
            Ok(body) => Ok(HttpResponse { status: 200, body }),
            Err(_) if start > 0 => Ok(HttpResponse {
                status: 200,
                body: EMPTY_FEED.to_vec(),
            }),
            Err(e) => {
                log::warn!("no fixture for query {query:?} at {}: {e}", path.display());
                Ok(HttpResponse {
                    status: 404,
                    body: Vec::new(),
                })
            }
        }
    }

    fn is_fixture(&self) -> bool {
        true
    }
}

pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
    fn utc_now(&self) -> DateTime<Utc>;
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d)
    }

    fn utc_now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Virtual clock: `sleep` advances time instantly and is recorded.
pub struct ManualClock {
    state: Mutex<(Duration, Vec<Duration>)>,
    epoch: DateTime<Utc>,
}

impl ManualClock {
    pub fn new(epoch: DateTime<Utc>) -> Self {
        ManualClock {
            state: Mutex::new((Duration::ZERO, Vec::new())),
            epoch,
        }
    }

    pub fn advance(&self, d: Duration) {
        self.state.lock().unwrap().0 += d;
    }

    pub fn sleeps(&self) -> Vec<Duration> {
        self.state.lock().unwrap().1.clone()
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        self.state.lock().unwrap().0
    }

    fn sleep(&self, d: Duration) {
        let mut s = self.state.lock().unwrap();
        s.0 += d;
        s.1.push(d);
    }

    fn utc_now(&self) -> DateTime<Utc> {
        self.epoch + chrono::Duration::from_std(self.now()).unwrap_or_default()
    }
}
