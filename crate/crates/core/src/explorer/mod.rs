//! Per-query orchestration: fetch, preprocess, represent, reduce, cluster,
//! label, score and bucket by year, with a flat-file result cache.

mod cache;
mod request;
mod trends;

pub use cache::{result_key, snapshot_key, ResultCache};
pub use request::{parse_date_bound, ExploreOptions, ExploreRequest, QueryInput, Terms};
pub use trends::{temporal_series, ClusterTrend, TrendPoint, TrendSeries};

use crate::arxiv::{ArxivClient, CorpusSnapshot, PaperRecord, QuerySpec, SnapshotSource};
use crate::cluster::{cluster, hdbscan_defaults, ClusterAlgorithm, ClusterAssignment, ClusterMode, ClusteringConfig};
use crate::exec::Execution;
use crate::labeling::{ctfidf_keywords, Keyword, KeywordSet, LabelingConfig};
use crate::metrics::{evaluate, CoherenceConfig, MetricReport, MetricSpace};
use crate::reduce::{reduce, ReductionConfig, ReductionMethod};
use crate::text::{
    content_tokens, preprocess_papers, represent_with, EmbeddingTransport, HttpEmbeddingTransport, RepresentationConfig,
};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

/// Below this many papers clustering and metrics carry no information.
pub const MIN_DOCUMENTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Fetch,
    Preprocess,
    Represent,
    Reduce,
    Cluster,
    Label,
    Metrics,
    Trends,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Fetch => "fetch",
            Stage::Preprocess => "preprocess",
            Stage::Represent => "represent",
            Stage::Reduce => "reduce",
            Stage::Cluster => "cluster",
            Stage::Label => "label",
            Stage::Metrics => "metrics",
            Stage::Trends => "trends",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("only {found} papers retrieved; at least {MIN_DOCUMENTS} are needed")]
    TooFewDocuments { found: usize },
    #[error("{} stage failed: {message}", stage.as_str())]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    fn at(stage: Stage) -> impl FnOnce(String) -> PipelineError {
        move |message| PipelineError::Stage { stage, message }
    }

    /// Stage the error belongs to, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            PipelineError::Stage { stage, .. } => Some(*stage),
            PipelineError::TooFewDocuments { .. } => Some(Stage::Fetch),
            PipelineError::InvalidConfig(_) => None,
        }
    }
}

/// Every knob that influences an exploration result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub representation: RepresentationConfig,
    pub reduction: ReductionConfig,
    pub clustering: ClusteringConfig,
    pub labeling: LabelingConfig,
    pub coherence: CoherenceConfig,
}

impl Default for PipelineConfig {
    /// Embeddings reduced to 10 UMAP dimensions, clustered by HDBSCAN.
    /// Without an embedding endpoint the hashed representation stands in.
    fn default() -> Self {
        PipelineConfig {
            representation: RepresentationConfig::from_env(),
            reduction: ReductionConfig::umap(10),
            clustering: ClusteringConfig::automatic(),
            labeling: LabelingConfig::default(),
            coherence: CoherenceConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn automatic() -> Self {
        Self::default()
    }

    /// The default run with agglomerative Ward at `k` clusters.
    pub fn user_controlled(k: usize) -> Self {
        PipelineConfig {
            clustering: ClusteringConfig::user(ClusterAlgorithm::AgglomerativeWard, k),
            ..Self::default()
        }
    }

    /// Seeds both the reduction and the clustering.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.reduction.umap.seed = seed;
        self.clustering.seed = seed;
        self
    }

    pub fn mode(&self) -> ClusterMode {
        self.clustering.algorithm.mode()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        if self.mode() == ClusterMode::UserControlled && !matches!(self.clustering.k, Some(k) if k >= 2) {
            return bad(format!("{} needs K >= 2", self.clustering.algorithm.as_str()));
        }
        if self.reduction.n_components == 0 {
            return bad("n_components must be >= 1".into());
        }
        if self.reduction.method == ReductionMethod::Umap {
            self.reduction.umap.validate().map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        }
        if self.labeling.top_n == 0 {
            return bad("top_n must be >= 1".into());
        }
        Ok(())
    }
}

/// Parameters resolved at run time from the corpus size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub n_papers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub umap_n_neighbors: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hdbscan_min_cluster_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hdbscan_min_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRef {
    pub query: QuerySpec,
    pub content_hash: String,
    pub fetched_at: DateTime<Utc>,
    pub source: SnapshotSource,
    pub n_papers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperListing {
    pub paper_index: usize,
    pub arxiv_id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub categories: Vec<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub url: String,
    pub published: DateTime<Utc>,
}

impl PaperListing {
    fn new(paper_index: usize, p: &PaperRecord) -> Self {
        PaperListing {
            paper_index,
            arxiv_id: p.arxiv_id.clone(),
            title: p.title.clone(),
            authors: p.authors.clone(),
            categories: p.categories.clone(),
            abstract_text: p.abstract_text.clone(),
            url: p.url.clone(),
            published: p.published,
        }
    }
}

/// One browsable cluster: its keywords and papers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTab {
    pub cluster_id: i64,
    pub uncategorized: bool,
    pub size: usize,
    pub keywords: Vec<Keyword>,
    pub papers: Vec<PaperListing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationResult {
    /// Cache key; also the id served by the result endpoint.
    pub result_id: String,
    pub snapshot: SnapshotRef,
    pub config: PipelineConfig,
    pub effective: EffectiveParams,
    pub assignment: ClusterAssignment,
    pub keywords: KeywordSet,
    pub metrics: MetricReport,
    pub trends: TrendSeries,
    /// Clusters by id, the uncategorized tab last.
    pub clusters: Vec<ClusterTab>,
    /// Cluster count found by automatic mode on the same reduction.
    pub suggested_k: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(default)]
    pub cached: bool,
}

impl ExplorationResult {
    /// JSON with sorted keys and without the fields that vary between
    /// identical runs (timings, fetch time, cache flag).
    pub fn stable_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("result serializes");
        let obj = v.as_object_mut().expect("result is an object");
        obj.remove("timings_ms");
        obj.remove("cached");
        if let Some(s) = obj.get_mut("snapshot").and_then(|s| s.as_object_mut()) {
            s.remove("fetched_at");
        }
        v
    }
}

struct Timer(BTreeMap<String, f64>, Instant);

impl Timer {
    fn new() -> Self {
        Timer(BTreeMap::new(), Instant::now())
    }

    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        self.0.insert(stage.as_str().to_string(), (now - self.1).as_secs_f64() * 1e3);
        self.1 = now;
    }
}

/// Runs every stage after retrieval on a snapshot.
pub fn analyze_snapshot(
    snapshot: &CorpusSnapshot,
    cfg: &PipelineConfig,
    exec: Execution,
    embedder: &dyn EmbeddingTransport,
) -> Result<ExplorationResult, PipelineError> {
    cfg.validate()?;
    let papers = &snapshot.papers;
    let n = papers.len();
    if n < MIN_DOCUMENTS {
        return Err(PipelineError::TooFewDocuments { found: n });
    }
    let mut timer = Timer::new();
    let mut warnings = Vec::new();

    let docs = preprocess_papers(papers).map_err(|e| PipelineError::at(Stage::Preprocess)(e.to_string()))?;
    let tokens: Vec<Vec<&str>> = docs.iter().map(content_tokens).collect();
    timer.lap(Stage::Preprocess);

    let matrix = represent_with(&docs, &cfg.representation, embedder).map_err(|e| PipelineError::at(Stage::Represent)(e.to_string()))?;
    timer.lap(Stage::Represent);

    let mut reduction = cfg.reduction.clone();
    let mut effective = EffectiveParams {
        n_papers: n,
        umap_n_neighbors: None,
        hdbscan_min_cluster_size: None,
        hdbscan_min_samples: None,
    };
    if reduction.method == ReductionMethod::Umap {
        let k = reduction.umap.n_neighbors.min(n - 1);
        if k < reduction.umap.n_neighbors {
            warnings.push(format!("n_neighbors lowered to {k} for {n} papers"));
        }
        reduction.umap.n_neighbors = k;
        effective.umap_n_neighbors = Some(k);
    }
    let reduced = reduce(&matrix.values, &reduction, exec).map_err(|e| PipelineError::at(Stage::Reduce)(e.to_string()))?;
    timer.lap(Stage::Reduce);

    let (mcs, ms) = hdbscan_defaults(n);
    let auto_cfg = ClusteringConfig {
        algorithm: ClusterAlgorithm::Hdbscan,
        ..cfg.clustering.clone()
    };
    let run_cluster = |c: &ClusteringConfig| cluster(&reduced.values, c).map_err(|e| PipelineError::at(Stage::Cluster)(e.to_string()));
    let assignment = run_cluster(&cfg.clustering)?;
    let suggested_k = if cfg.mode() == ClusterMode::Automatic {
        assignment.n_clusters
    } else {
        run_cluster(&auto_cfg)?.n_clusters
    };
    // HDBSCAN runs in both modes, for the assignment or the suggestion.
    effective.hdbscan_min_cluster_size = Some(cfg.clustering.min_cluster_size.unwrap_or(mcs));
    effective.hdbscan_min_samples = Some(cfg.clustering.min_samples.or(cfg.clustering.min_cluster_size).unwrap_or(ms));
    timer.lap(Stage::Cluster);

    let keywords = ctfidf_keywords(&docs, &assignment, &cfg.labeling).map_err(|e| PipelineError::at(Stage::Label)(e.to_string()))?;
    if let Some(w) = &keywords.warning {
        warnings.push(w.clone());
    }
    timer.lap(Stage::Label);

    let metrics = evaluate(
        &reduced.values,
        &assignment,
        &keywords.topics(),
        &tokens,
        &cfg.coherence,
        MetricSpace::Reduced,
    );
    timer.lap(Stage::Metrics);

    let trends = temporal_series(&assignment.labels, papers, (snapshot.query.date_start, snapshot.query.date_end));
    timer.lap(Stage::Trends);

    let mut clusters: Vec<ClusterTab> = keywords
        .clusters
        .iter()
        .chain(keywords.uncategorized.iter())
        .map(|kw| {
            let members = assignment.members(kw.cluster_id);
            ClusterTab {
                cluster_id: kw.cluster_id,
                uncategorized: kw.uncategorized,
                size: members.len(),
                keywords: kw.keywords.clone(),
                papers: members.iter().map(|&i| PaperListing::new(i, &papers[i])).collect(),
            }
        })
        .collect();
    clusters.sort_by_key(|t| (t.uncategorized, t.cluster_id));
    let listed: usize = clusters.iter().map(|t| t.size).sum();
    if listed != n {
        return Err(PipelineError::at(Stage::Label)(format!("{listed} of {n} papers have a cluster tab")));
    }

    Ok(ExplorationResult {
        result_id: result_key(&snapshot.query, cfg),
        snapshot: SnapshotRef {
            query: snapshot.query.clone(),
            content_hash: snapshot.content_hash(),
            fetched_at: snapshot.fetched_at,
            source: snapshot.source,
            n_papers: n,
        },
        config: cfg.clone(),
        effective,
        assignment,
        keywords,
        metrics,
        trends,
        clusters,
        suggested_k,
        warnings,
        timings_ms: timer.0,
        cached: false,
    })
}

/// Shared state for serving explorations: one arXiv client (and so one
/// rate limiter), an optional cache and the embedding transport.
#[derive(Clone)]
pub struct Explorer {
    client: Arc<ArxivClient>,
    cache: Option<ResultCache>,
    exec: Execution,
    embedder: Arc<dyn EmbeddingTransport>,
}

impl Explorer {
    pub fn new(client: Arc<ArxivClient>) -> Self {
        Explorer {
            client,
            cache: None,
            exec: Execution::default(),
            embedder: Arc::new(HttpEmbeddingTransport),
        }
    }

    pub fn with_cache(mut self, cache: Option<ResultCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_embedder(mut self, embedder: Arc<dyn EmbeddingTransport>) -> Self {
        self.embedder = embedder;
        self
    }

    pub fn cache(&self) -> Option<&ResultCache> {
        self.cache.as_ref()
    }

    pub fn cached_lookup(&self, spec: &QuerySpec, cfg: &PipelineConfig) -> Option<ExplorationResult> {
        self.cache.as_ref()?.get(&result_key(spec, cfg))
    }

    /// Stored result by id.
    pub fn result(&self, id: &str) -> Option<ExplorationResult> {
        self.cache.as_ref()?.get(id)
    }

    fn snapshot(&self, spec: &QuerySpec) -> Result<CorpusSnapshot, PipelineError> {
        if let Some(s) = self.cache.as_ref().and_then(|c| c.get_snapshot(spec)) {
            return Ok(s);
        }
        let snapshot = self.client.fetch(spec).map_err(|e| PipelineError::at(Stage::Fetch)(e.to_string()))?;
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.put_snapshot(&snapshot) {
                log::warn!("could not cache snapshot: {e}");
            }
        }
        Ok(snapshot)
    }

    pub fn run_pipeline(&self, spec: &QuerySpec, cfg: &PipelineConfig) -> Result<ExplorationResult, PipelineError> {
        cfg.validate()?;
        spec.validate().map_err(|e| PipelineError::at(Stage::Fetch)(e.to_string()))?;
        if let Some(hit) = self.cached_lookup(spec, cfg) {
            return Ok(hit);
        }
        let fetch_started = Instant::now();
        let snapshot = self.snapshot(spec)?;
        let fetch_ms = fetch_started.elapsed().as_secs_f64() * 1e3;
        let mut result = analyze_snapshot(&snapshot, cfg, self.exec, self.embedder.as_ref())?;
        result.timings_ms.insert(Stage::Fetch.as_str().to_string(), fetch_ms);
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.put(&result) {
                log::warn!("could not cache result: {e}");
            }
        }
        Ok(result)
    }
}
