use super::{
    build_query_string, dedupe_latest, parse_atom, ArxivError, Clock, CorpusSnapshot, FixtureTransport,
    HttpTransport, PaperRecord, QuerySpec, SnapshotSource, SystemClock, Transport,
};
use std::sync::{Arc, Mutex};
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub endpoint: String,
    pub page_size: usize,
    /// Minimum gap between consecutive requests.
    pub courtesy_delay: Duration,
    /// Total attempts per page, the first one included.
    pub max_attempts: usize,
    /// Backoff before retry `i` (1-based) is `backoff_base * 2^(i-1)`.
    pub backoff_base: Duration,
    /// Hard stop on pages per query.
    pub max_pages: usize,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            endpoint: "https://export.arxiv.org/api/query".into(),
            page_size: 100,
            courtesy_delay: Duration::from_secs(3),
            max_attempts: 3,
            backoff_base: Duration::from_secs(1),
            max_pages: 50,
        }
    }
}

/// Serializes requests and keeps them at least `delay` apart. The lock is
/// held while waiting, so concurrent callers queue behind one another.
pub struct RateLimiter {
    delay: Duration,
    last: Mutex<Option<Duration>>,
}

impl RateLimiter {
    pub fn new(delay: Duration) -> Self {
        RateLimiter {
            delay,
            last: Mutex::new(None),
        }
    }

    /// Runs `f` once the courtesy gap since the previous call has elapsed.
    pub fn run<T>(&self, clock: &dyn Clock, f: impl FnOnce() -> T) -> T {
        let mut last = self.last.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(prev) = *last {
            let ready = prev + self.delay;
            let now = clock.now();
            if now < ready {
                clock.sleep(ready - now);
            }
        }
        *last = Some(clock.now());
        f()
    }
}

pub struct ArxivClient {
    transport: Arc<dyn Transport>,
    clock: Arc<dyn Clock>,
    limiter: Arc<RateLimiter>,
    config: ClientConfig,
}

impl ArxivClient {
    pub fn new(transport: Arc<dyn Transport>, clock: Arc<dyn Clock>, config: ClientConfig) -> Self {
        let limiter = Arc::new(RateLimiter::new(config.courtesy_delay));
        ArxivClient {
            transport,
            clock,
            limiter,
            config,
        }
    }

    /// Live client against the public endpoint with default etiquette.
    pub fn live() -> Self {
        Self::new(
            Arc::new(HttpTransport::default()),
            Arc::new(SystemClock::default()),
            ClientConfig::default(),
        )
    }

    /// Reads recorded feeds from `dir` instead of the network.
    pub fn fixture(dir: impl Into<std::path::PathBuf>) -> Self {
        let config = ClientConfig {
            courtesy_delay: Duration::ZERO,
            backoff_base: Duration::ZERO,
            ..ClientConfig::default()
        };
        Self::new(Arc::new(FixtureTransport::new(dir)), Arc::new(SystemClock::default()), config)
    }

    /// Fixture client when `ELIOT_FIXTURE_DIR` is set, live otherwise.
    pub fn from_env() -> Self {
        match std::env::var_os("ELIOT_FIXTURE_DIR") {
            Some(dir) if !dir.is_empty() => Self::fixture(dir),
            _ => Self::live(),
        }
    }

    /// Shares one limiter across clients (e.g. per-request clients in a server).
    pub fn with_limiter(mut self, limiter: Arc<RateLimiter>) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn limiter(&self) -> Arc<RateLimiter> {
        self.limiter.clone()
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    fn request_page(&self, params: &[(String, String)]) -> Result<Vec<u8>, ArxivError> {
        let mut last_status = None;
        let mut last_message = String::new();
        for attempt in 1..=self.config.max_attempts.max(1) {
            if attempt > 1 {
                let backoff = self.config.backoff_base * 2u32.pow((attempt - 2) as u32);
                if !backoff.is_zero() {
                    self.clock.sleep(backoff);
                }
            }
            let outcome = self
                .limiter
                .run(self.clock.as_ref(), || self.transport.get(&self.config.endpoint, params));
            match outcome {
                Ok(resp) if resp.status == 200 => return Ok(resp.body),
                Ok(resp) => {
                    last_status = Some(resp.status);
                    last_message = format!("HTTP {}", resp.status);
                    let retryable = resp.status == 429 || resp.status >= 500;
                    if !retryable {
                        return Err(ArxivError::Retrieval {
                            status: last_status,
                            attempts: attempt,
                            message: last_message,
                        });
                    }
                    log::warn!("arXiv returned HTTP {} (attempt {attempt})", resp.status);
                }
                Err(e) => {
                    last_message = e.0.clone();
                    log::warn!("arXiv request failed (attempt {attempt}): {}", e.0);
                }
            }
        }
        Err(ArxivError::Retrieval {
            status: last_status,
            attempts: self.config.max_attempts.max(1),
            message: last_message,
        })
    }

    /// Fetches up to `spec.max_results` distinct papers, page by page.
    pub fn fetch(&self, spec: &QuerySpec) -> Result<CorpusSnapshot, ArxivError> {
        spec.validate()?;
        let search_query = build_query_string(spec)?;
        let page_size = self.config.page_size.max(1);
        let mut collected: Vec<PaperRecord> = Vec::new();
        let mut start = 0usize;
        let mut skipped = 0usize;

        for _ in 0..self.config.max_pages {
            let want = page_size.min(spec.max_results.saturating_sub(collected.len())).max(1);
            let params = vec![
                ("search_query".to_string(), search_query.clone()),
                ("start".to_string(), start.to_string()),
                ("max_results".to_string(), want.to_string()),
                ("sortBy".to_string(), spec.sort.api_name().to_string()),
                ("sortOrder".to_string(), "descending".to_string()),
            ];
            let body = self.request_page(&params)?;
            let feed = parse_atom(&body)?;
            skipped += feed.skipped;
            let returned = feed.papers.len() + feed.skipped;

            let in_window = feed
                .papers
                .into_iter()
                .take(want)
                .filter(|p| spec.in_window(p.published.date_naive()));
            collected.extend(in_window);
            collected = dedupe_latest(collected);

            start += returned.min(want);
            let exhausted = returned < want || feed.total_results.is_some_and(|total| start >= total);
            if collected.len() >= spec.max_results || exhausted {
                break;
            }
        }
        collected.truncate(spec.max_results);
        if skipped > 0 {
            log::warn!("skipped {skipped} feed entries with missing fields");
        }
        let source = if self.transport.is_fixture() {
            SnapshotSource::Fixture
        } else {
            SnapshotSource::Live
        };
        Ok(CorpusSnapshot {
            query: spec.clone(),
            fetched_at: self.clock.utc_now(),
            source,
            papers: collected,
        })
    }
}

/// Convenience wrapper over [`ArxivClient::fetch`].
pub fn fetch_corpus(spec: &QuerySpec, client: &ArxivClient) -> Result<CorpusSnapshot, ArxivError> {
    client.fetch(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arxiv::{HttpResponse, ManualClock, TransportError};
    use chrono::{TimeZone, Utc};

    struct ScriptedTransport {
        responses: Mutex<Vec<HttpResponse>>,
        calls: Mutex<Vec<(Duration, Vec<(String, String)>)>>,
        clock: Arc<ManualClock>,
    }

    impl ScriptedTransport {
        fn new(clock: Arc<ManualClock>, responses: Vec<HttpResponse>) -> Self {
            ScriptedTransport {
                responses: Mutex::new(responses.into_iter().rev().collect()),
                calls: Mutex::new(Vec::new()),
                clock,
            }
        }
    }

    impl Transport for ScriptedTransport {
        fn get(&self, _url: &str, params: &[(String, String)]) -> Result<HttpResponse, TransportError> {
            self.calls.lock().unwrap().push((self.clock.now(), params.to_vec()));
            self.responses
                .lock()
                .unwrap()
                .pop()
                .ok_or_else(|| TransportError("script exhausted".into()))
        }
    }

    fn feed(entries: &[(String, u32, &str)]) -> HttpResponse {
        let mut xml = String::from(r#"<feed xmlns="http://www.w3.org/2005/Atom">"#);
        for (id, v, date) in entries {
            xml.push_str(&format!(
                "<entry><id>http://arxiv.org/abs/{id}v{v}</id><published>{date}T00:00:00Z</published>\
                 <updated>{date}T00:00:00Z</updated><title>T {id}</title><summary>S {id}</summary></entry>"
            ));
        }
        xml.push_str("</feed>");
        HttpResponse { status: 200, body: xml.into_bytes() }
    }

    fn setup(responses: Vec<HttpResponse>, page_size: usize) -> (ArxivClient, Arc<ScriptedTransport>, Arc<ManualClock>) {
        let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap()));
        let transport = Arc::new(ScriptedTransport::new(clock.clone(), responses));
        let config = ClientConfig {
            page_size,
            ..ClientConfig::default()
        };
        (ArxivClient::new(transport.clone(), clock.clone(), config), transport, clock)
    }

    fn ids(n: usize) -> Vec<(String, u32, &'static str)> {
        (0..n).map(|i| (format!("2401.{i:05}"), 1, "2024-05-01")).collect()
    }

    #[test]
    fn truncates_to_limit() {
        let (client, _, _) = setup(vec![feed(&ids(35))], 100);
        let snap = client.fetch(&QuerySpec::new(["x"]).with_max_results(20)).unwrap();
        assert_eq!(snap.papers.len(), 20);
        assert_eq!(snap.papers[0].arxiv_id, "2401.00000");
        assert_eq!(snap.papers[19].arxiv_id, "2401.00019");
        assert_eq!(snap.source, SnapshotSource::Live);
    }

    #[test]
    fn keeps_latest_version() {
        let entries = vec![("X".to_string(), 1, "2024-01-01"), ("X".to_string(), 2, "2024-01-01")];
        let (client, _, _) = setup(vec![feed(&entries)], 100);
        let snap = client.fetch(&QuerySpec::new(["x"]).with_max_results(20)).unwrap();
        assert_eq!(snap.papers.len(), 1);
        assert_eq!(snap.papers[0].version, 2);
    }

    #[test]
    fn paginates_with_courtesy_delay() {
        let all = ids(50);
        let pages = vec![feed(&all[..20]), feed(&all[20..40]), feed(&all[40..])];
        let (client, transport, _) = setup(pages, 20);
        let snap = client.fetch(&QuerySpec::new(["x"]).with_max_results(100)).unwrap();
        assert_eq!(snap.papers.len(), 50);
        let calls = transport.calls.lock().unwrap();
        assert_eq!(calls.len(), 3);
        let starts: Vec<_> = calls
            .iter()
            .map(|(_, p)| p.iter().find(|(k, _)| k == "start").unwrap().1.clone())
            .collect();
        assert_eq!(starts, vec!["0", "20", "40"]);
        for pair in calls.windows(2) {
            assert!(pair[1].0 - pair[0].0 >= Duration::from_secs(3));
        }
    }

    #[test]
    fn three_503s_give_retrieval_error() {
        let busy = || HttpResponse { status: 503, body: vec![] };
        let (client, transport, clock) = setup(vec![busy(), busy(), busy(), feed(&ids(1))], 100);
        match client.fetch(&QuerySpec::new(["x"]).with_max_results(20)) {
            Err(ArxivError::Retrieval { status, attempts, .. }) => {
                assert_eq!(status, Some(503));
                assert_eq!(attempts, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(transport.calls.lock().unwrap().len(), 3);
        // backoff 1s then 2s, each followed by the courtesy wait remainder
        let slept: Duration = clock.sleeps().iter().sum();
        assert!(slept >= Duration::from_secs(6));
    }

    #[test]
    fn recovers_after_transient_failure() {
        let (client, _, _) = setup(vec![HttpResponse { status: 500, body: vec![] }, feed(&ids(3))], 100);
        let snap = client.fetch(&QuerySpec::new(["x"]).with_max_results(20)).unwrap();
        assert_eq!(snap.papers.len(), 3);
    }

    #[test]
    fn client_error_not_retried() {
        let (client, transport, _) = setup(vec![HttpResponse { status: 400, body: vec![] }], 100);
        assert!(matches!(
            client.fetch(&QuerySpec::new(["x"]).with_max_results(20)),
            Err(ArxivError::Retrieval { status: Some(400), attempts: 1, .. })
        ));
        assert_eq!(transport.calls.lock().unwrap().len(), 1);
    }

    #[test]
    fn zero_results_is_empty_snapshot() {
        let (client, _, _) = setup(vec![feed(&[])], 100);
        let snap = client.fetch(&QuerySpec::new(["x"]).with_max_results(20)).unwrap();
        assert!(snap.papers.is_empty());
    }

    #[test]
    fn malformed_feed_is_parse_error() {
        let (client, _, _) = setup(vec![HttpResponse { status: 200, body: b"<feed><entry>".to_vec() }], 100);
        assert!(matches!(
            client.fetch(&QuerySpec::new(["x"]).with_max_results(20)),
            Err(ArxivError::Parse { .. })
        ));
    }

    #[test]
    fn date_window_rechecked_client_side() {
        let entries = vec![
            ("A".to_string(), 1, "2023-12-31"),
            ("B".to_string(), 1, "2024-06-01"),
            ("C".to_string(), 1, "2026-05-01"),
        ];
        let (client, transport, _) = setup(vec![feed(&entries)], 100);
        let d = |s: &str| chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        let spec = QuerySpec::new(["x"])
            .with_max_results(20)
            .with_dates(Some(d("2024-01-01")), Some(d("2026-04-30")));
        let snap = client.fetch(&spec).unwrap();
        assert_eq!(snap.papers.iter().map(|p| p.arxiv_id.as_str()).collect::<Vec<_>>(), vec!["B"]);
        let calls = transport.calls.lock().unwrap();
        let q = &calls[0].1.iter().find(|(k, _)| k == "search_query").unwrap().1;
        assert!(q.contains("submittedDate:[202401010000 TO 202604302359]"));
    }

    #[test]
    fn limiter_spacing_across_threads() {
        let clock = Arc::new(ManualClock::new(Utc::now()));
        let limiter = Arc::new(RateLimiter::new(Duration::from_secs(3)));
        let stamps = Arc::new(Mutex::new(Vec::new()));
        std::thread::scope(|s| {
            for _ in 0..4 {
                let (clock, limiter, stamps) = (clock.clone(), limiter.clone(), stamps.clone());
                s.spawn(move || {
                    limiter.run(clock.as_ref(), || stamps.lock().unwrap().push(clock.now()));
                });
            }
        });
        let mut stamps = stamps.lock().unwrap().clone();
        stamps.sort();
        for w in stamps.windows(2) {
            assert!(w[1] - w[0] >= Duration::from_secs(3));
        }
    }
}
