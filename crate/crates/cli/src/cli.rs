use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use eliot_core::arxiv::{parse_atom, ArxivClient, CorpusSnapshot, QuerySpec, SnapshotSource, SortOrder};
use eliot_core::cluster::{ClusterAlgorithm, ClusterMode};
use eliot_core::exec::Execution;
use eliot_core::explorer::{ExploreOptions, ExploreRequest, Explorer, PipelineConfig, QueryInput, ResultCache, Terms};
use eliot_core::reduce::ReductionMethod;
use eliot_core::sweep::{
    component_frequency_default, presets, rank_aggregate, run_sweep, write_csv, RankTable, SweepCorpus, SweepGrid,
    SweepOptions, FULL_COMPONENTS, FULL_KS,
};
use eliot_core::text::{EmbeddingEndpointConfig, Representation, RepresentationConfig};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

#[derive(Debug, Parser)]
#[command(name = "eliot", version, about = "Query-time clustering and keyword exploration of arXiv search results")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fetch, cluster and label one query; write the result JSON.
    Explore(ExploreArgs),
    /// Fetch one query (or preset) and save the corpus snapshot.
    Fetch(FetchArgs),
    /// Run the configuration grid over saved snapshots and rank the results.
    Sweep(SweepArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
    /// List the bundled domain presets.
    Presets,
}

fn parse_sort(s: &str) -> Result<SortOrder, String> {
    match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "relevance" => Ok(SortOrder::Relevance),
        "submitted" | "submitteddate" | "date" => Ok(SortOrder::SubmittedDate),
        other => Err(format!("unknown sort order {other:?} (relevance | submitted-date)")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct QueryArgs {
    /// Comma-separated phrases; all must match title or abstract.
    #[arg(long)]
    pub terms: Option<String>,
    /// Archive (`cs`) or subject class (`cs.CL`).
    #[arg(long)]
    pub category: Option<String>,
    /// Earliest submission month or day, e.g. 2024-04.
    #[arg(long)]
    pub from: Option<String>,
    /// Latest submission month or day, e.g. 2026-04.
    #[arg(long)]
    pub to: Option<String>,
    #[arg(long)]
    pub max_results: Option<usize>,
    #[arg(long, value_parser = parse_sort)]
    pub sort: Option<SortOrder>,
}

impl QueryArgs {
    fn input(&self) -> Result<QueryInput> {
        let Some(terms) = &self.terms else { bail!("--terms is required") };
        Ok(QueryInput {
            terms: Terms::Joined(terms.clone()),
            category: self.category.clone(),
            date_start: self.from.clone(),
            date_end: self.to.clone(),
            max_results: self.max_results,
            sort: self.sort,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Read recorded Atom feeds from this directory instead of arXiv
    /// (defaults to ELIOT_FIXTURE_DIR).
    #[arg(long)]
    pub fixture_dir: Option<PathBuf>,
    /// Cache directory for snapshots and results (defaults to ELIOT_CACHE_DIR).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
    /// Expire cache entries older than this many seconds.
    #[arg(long)]
    pub cache_ttl: Option<u64>,
    /// Disable the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

impl SourceArgs {
    fn client(&self) -> ArxivClient {
        match &self.fixture_dir {
            Some(dir) => ArxivClient::fixture(dir),
            None => ArxivClient::from_env(),
        }
    }

    fn cache(&self) -> Option<ResultCache> {
        if self.no_cache {
            return None;
        }
        let cache = self.cache.clone().map(ResultCache::new).or_else(ResultCache::from_env)?;
        Some(cache.with_ttl(self.cache_ttl.map(Duration::from_secs)))
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    pub fn explorer(&self) -> Explorer {
        Explorer::new(Arc::new(self.client())).with_cache(self.cache()).with_exec(self.exec())
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// auto (HDBSCAN, noise becomes an uncategorized tab) or user (fixed K).
    #[arg(long)]
    pub mode: Option<ClusterMode>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub algorithm: Option<ClusterAlgorithm>,
    /// external | hashed | tfidf
    #[arg(long)]
    pub representation: Option<Representation>,
    /// svd | umap
    #[arg(long)]
    pub reducer: Option<ReductionMethod>,
    #[arg(long)]
    pub n_components: Option<usize>,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExploreArgs {
    pub fn request(&self) -> Result<ExploreRequest> {
        Ok(ExploreRequest {
            query: self.query.input()?,
            config: ExploreOptions {
                mode: self.mode,
                k: self.k,
                max_results: None,
                sort: None,
                algorithm: self.algorithm,
                representation: self.representation,
                reducer: self.reducer,
                n_components: self.n_components,
                top_n: self.top_n,
                seed: self.seed,
            },
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct FetchArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Use a bundled preset's query (see `eliot presets`).
    #[arg(long, conflicts_with = "terms")]
    pub preset: Option<String>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Corpus snapshots (JSON) or raw Atom feeds (.xml); the file stem names the dataset.
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
    /// Fill every axis not given explicitly with the full evaluation grid.
    #[arg(long = "paper-grid")]
    pub full_grid: bool,
    #[arg(long, value_delimiter = ',')]
    pub representations: Option<Vec<Representation>>,
    #[arg(long, value_delimiter = ',')]
    pub reducers: Option<Vec<ReductionMethod>>,
    #[arg(long, value_delimiter = ',')]
    pub components: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Option<Vec<ClusterAlgorithm>>,
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub sequential: bool,
    /// Ranked CSV; a `.summary.json` with winners and the derived default
    /// is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

fn pick<T: Clone>(full_grid: bool, given: &Option<Vec<T>>, name: &str, full: Vec<T>) -> Result<Vec<T>> {
    match (given, full_grid) {
        (Some(v), _) => Ok(v.clone()),
        (None, true) => Ok(full),
        (None, false) => bail!("--{name} is required without --paper-grid"),
    }
}

impl SweepArgs {
    pub fn grid(&self) -> Result<SweepGrid> {
        let default_reps = || {
            let mut reps = vec![Representation::Tfidf, Representation::Hashed];
            if EmbeddingEndpointConfig::from_env().is_some() {
                reps.insert(0, Representation::External);
            }
            reps
        };
        Ok(SweepGrid {
            representations: pick(self.full_grid, &self.representations, "representations", default_reps())?,
            reducers: pick(self.full_grid, &self.reducers, "reducers", vec![ReductionMethod::Svd, ReductionMethod::Umap])?,
            components: pick(self.full_grid, &self.components, "components", FULL_COMPONENTS.to_vec())?,
            algorithms: pick(self.full_grid, &self.algorithms, "algorithms", ClusterAlgorithm::USER_CONTROLLED.to_vec())?,
            ks: pick(self.full_grid, &self.ks, "ks", FULL_KS.to_vec())?,
            seeds: self.seeds.clone().unwrap_or_else(|| vec![42]),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[command(flatten)]
    pub source: SourceArgs,
}

fn write_json(out: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn explore(args: &ExploreArgs) -> Result<()> {
    let (spec, cfg) = args.request()?.resolve(&PipelineConfig::default())?;
    let result = args.source.explorer().run_pipeline(&spec, &cfg)?;
    log::info!(
        "{} papers, {} clusters, {} uncategorized{}",
        result.snapshot.n_papers,
        result.assignment.n_clusters,
        result.assignment.noise_count(),
        if result.cached { " (cached)" } else { "" }
    );
    write_json(args.out.as_deref(), &result)
}

pub fn fetch(args: &FetchArgs) -> Result<()> {
    let spec: QuerySpec = match &args.preset {
        Some(id) => {
            let all = presets();
            let Some(p) = all.iter().find(|p| p.id == *id || p.dataset.eq_ignore_ascii_case(id)) else {
                bail!("no preset {id:?}; known: {}", all.iter().map(|p| p.id.as_str()).collect::<Vec<_>>().join(", "))
            };
            p.query.clone()
        }
        None => {
            let req = ExploreRequest {
                query: args.query.input()?,
                config: ExploreOptions::default(),
            };
            req.resolve(&PipelineConfig::default())?.0
        }
    };
    let snapshot = args.source.client().fetch(&spec)?;
    snapshot.save(&args.out)?;
    log::info!("saved {} papers to {}", snapshot.papers.len(), args.out.display());
    Ok(())
}

fn load_corpus(path: &Path) -> Result<SweepCorpus> {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".into());
    let snapshot = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml")) {
        let feed = parse_atom(&std::fs::read(path).with_context(|| format!("reading {}", path.display()))?)?;
        CorpusSnapshot {
            query: QuerySpec::new([name.clone()]).with_max_results(feed.papers.len().clamp(20, 500)),
            fetched_at: chrono::Utc::now(),
            source: SnapshotSource::Fixture,
            papers: feed.papers,
        }
    } else {
        CorpusSnapshot::load(path)?
    };
    Ok(SweepCorpus::from_snapshot(name, &snapshot)?)
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let grid = args.grid()?;
    let opts = SweepOptions {
        exec: if args.sequential { Execution::Sequential } else { Execution::default() },
        representation: RepresentationConfig {
            endpoint: EmbeddingEndpointConfig::from_env(),
            ..RepresentationConfig::of(Representation::Tfidf)
        },
        ..SweepOptions::default()
    };
    eprintln!("# metrics are computed in the reduced space of each configuration");
    let mut tables: Vec<RankTable> = Vec::new();
    let mut corpora = Vec::new();
    for path in &args.corpus {
        let corpus = load_corpus(path)?;
        let records = run_sweep(&corpus, &grid, &opts)?;
        let failed = records.iter().filter(|r| r.error.is_some()).count();
        let table = rank_aggregate(records)?;
        let w = table.winner();
        eprintln!("{}: {} configs, {failed} failed, winner {} (aggregate {})", corpus.name, table.records.len(), w.config, w.aggregate.unwrap_or(f64::NAN));
        corpora.push(json!({
            "dataset": corpus.name,
            "n_docs": corpus.docs.len(),
            "configs": table.records.len(),
            "failed": failed,
            "winner": w.config,
            "winner_aggregate": w.aggregate,
            "winner_metrics": w.metrics,
        }));
        tables.push(table);
    }
    let winners: Vec<_> = tables.iter().map(|t| (t.winner().config, t.winner().metrics.clone())).collect();
    let default = component_frequency_default(&winners)?;
    let file = std::fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_csv(std::io::BufWriter::new(file), &tables)?;
    let summary = json!({
        "metric_space": "reduced",
        "grid": grid,
        "corpora": corpora,
        "default": default,
    });
    let mut summary_path = args.out.clone().into_os_string();
    summary_path.push(".summary.json");
    write_json(Some(Path::new(&summary_path)), &summary)?;
    Ok(())
}

pub fn list_presets() -> Result<()> {
    write_json(None, &presets())
}
