use super::{enumerate_grid, ConfigTuple, SweepError, SweepGrid, SweepMetrics, SweepRecord};
use crate::arxiv::CorpusSnapshot;
use crate::cluster::{cluster, ClusteringConfig};
use crate::exec::Execution;
use crate::labeling::{ctfidf_keywords, LabelingConfig};
use crate::metrics::{evaluate, CoherenceConfig, Metric, MetricSpace};
use crate::reduce::{reduce, ReducedMatrix, ReductionConfig, ReductionMethod, UmapParams};
use crate::text::{content_tokens, preprocess_papers, represent, PreprocessedDoc, Representation, RepresentationConfig};
use std::collections::BTreeMap;
use std::time::Instant;

/// A named, preprocessed corpus.
#[derive(Debug, Clone)]
pub struct SweepCorpus {
    pub name: String,
    pub docs: Vec<PreprocessedDoc>,
}

impl SweepCorpus {
    pub fn from_snapshot(name: impl Into<String>, snapshot: &CorpusSnapshot) -> Result<Self, SweepError> {
        let name = name.into();
        let docs = preprocess_papers(&snapshot.papers).map_err(|e| SweepError::Corpus {
            corpus: name.clone(),
            message: e.to_string(),
        })?;
        Ok(SweepCorpus { name, docs })
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub exec: Execution,
    /// Template for every representation; `kind` is overridden per config.
    pub representation: RepresentationConfig,
    pub umap: UmapParams,
    pub labeling: LabelingConfig,
    pub coherence: CoherenceConfig,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            exec: Execution::default(),
            representation: RepresentationConfig::of(Representation::Tfidf),
            umap: UmapParams::default(),
            labeling: LabelingConfig::default(),
            coherence: CoherenceConfig::default(),
        }
    }
}

type ReductionKey = (Representation, ReductionMethod, usize, u64);

/// Mean of the defined values over seeds; undefined if any seed was.
fn mean_metric(ms: &[&Metric]) -> Metric {
    if let Some(u) = ms.iter().find(|m| !m.is_defined()) {
        return (*u).clone();
    }
    if ms.iter().any(|m| matches!(m, Metric::Infinite)) {
        return Metric::Infinite;
    }
    let vals: Vec<f64> = ms.iter().filter_map(|m| m.as_f64()).collect();
    Metric::value(vals.iter().sum::<f64>() / vals.len() as f64)
}

fn run_one(
    corpus: &SweepCorpus,
    tokens: &[Vec<&str>],
    reduced: &Result<ReducedMatrix, String>,
    config: &ConfigTuple,
    seed: u64,
    opts: &SweepOptions,
) -> Result<SweepMetrics, String> {
    let reduced = reduced.as_ref().map_err(Clone::clone)?;
    let ccfg = ClusteringConfig::user(config.algorithm, config.k).with_seed(seed);
    let assignment = cluster(&reduced.values, &ccfg).map_err(|e| format!("cluster: {e}"))?;
    let keywords = ctfidf_keywords(&corpus.docs, &assignment, &opts.labeling).map_err(|e| format!("label: {e}"))?;
    let report = evaluate(
        &reduced.values,
        &assignment,
        &keywords.topics(),
        tokens,
        &opts.coherence,
        MetricSpace::Reduced,
    );
    Ok(SweepMetrics {
        chi: report.chi,
        dbi: report.dbi,
        sil: report.sil,
        c_v: report.c_v,
        c_npmi: report.c_npmi,
    })
}

/// Runs every grid configuration over one corpus. Each representation and
/// each reduction is computed once and shared by the configurations that
/// use it. Failures become records with undefined metrics and an error
/// message instead of aborting the sweep. Output follows grid order.
pub fn run_sweep(corpus: &SweepCorpus, grid: &SweepGrid, opts: &SweepOptions) -> Result<Vec<SweepRecord>, SweepError> {
    let configs = enumerate_grid(grid)?;
    let exec = opts.exec;
    let n = corpus.docs.len();
    let tokens: Vec<Vec<&str>> = corpus.docs.iter().map(content_tokens).collect();

    let reps: Vec<Representation> = grid.representations.clone();
    let matrices: BTreeMap<Representation, Result<_, String>> = reps
        .iter()
        .zip(exec.map(&reps, |&kind| {
            let cfg = RepresentationConfig {
                kind,
                ..opts.representation.clone()
            };
            represent(&corpus.docs, &cfg).map_err(|e| format!("represent: {e}"))
        }))
        .map(|(k, v)| (*k, v))
        .collect();

    let mut keys: Vec<ReductionKey> = configs
        .iter()
        .flat_map(|c| grid.seeds.iter().map(move |&s| (c.representation, c.reducer, c.n_components, s)))
        .collect();
    keys.sort();
    keys.dedup();
    let mut umap = opts.umap.clone();
    umap.n_neighbors = umap.n_neighbors.min(n.saturating_sub(1)).max(2);
    let reduced: BTreeMap<ReductionKey, Result<ReducedMatrix, String>> = keys
        .iter()
        .zip(exec.map(&keys, |&(rep, method, n_components, seed)| {
            let x = matrices[&rep].as_ref().map_err(Clone::clone)?;
            let cfg = ReductionConfig {
                method,
                n_components,
                umap: umap.clone(),
            }
            .with_seed(seed);
            reduce(&x.values, &cfg, Execution::Sequential).map_err(|e| format!("reduce: {e}"))
        }))
        .map(|(k, v)| (*k, v))
        .collect();

    let records = exec.map(&configs, |config| {
        let started = Instant::now();
        let mut runs = Vec::with_capacity(grid.seeds.len());
        let mut error = None;
        for &seed in &grid.seeds {
            let key = (config.representation, config.reducer, config.n_components, seed);
            match run_one(corpus, &tokens, &reduced[&key], config, seed, opts) {
                Ok(m) => runs.push(m),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        let metrics = match &error {
            Some(e) => SweepMetrics::failed(e),
            None => {
                let pick = |f: fn(&SweepMetrics) -> &Metric| mean_metric(&runs.iter().map(f).collect::<Vec<_>>());
                SweepMetrics {
                    chi: pick(|m| &m.chi),
                    dbi: pick(|m| &m.dbi),
                    sil: pick(|m| &m.sil),
                    c_v: pick(|m| &m.c_v),
                    c_npmi: pick(|m| &m.c_npmi),
                }
            }
        };
        let mut rec = SweepRecord::new(corpus.name.clone(), *config, metrics);
        rec.error = error;
        rec.runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        rec
    });
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterAlgorithm;
    use crate::sweep::rank_aggregate;

    fn corpus() -> SweepCorpus {
        let themes = [
            ["quantum", "qubit", "entanglement", "circuit", "error", "correction"],
            ["protein", "folding", "molecule", "binding", "structure", "enzyme"],
            ["market", "portfolio", "risk", "asset", "return", "volatility"],
        ];
        let docs = (0..24)
            .map(|i| {
                let t = &themes[i % 3];
                let words: Vec<&str> = (0..30).map(|j| t[(i * 7 + j * (j % 4 + 1)) % 6]).collect();
                PreprocessedDoc::from_tokens(i, words)
            })
            .collect();
        SweepCorpus { name: "toy".into(), docs }
    }

    fn grid() -> SweepGrid {
        SweepGrid {
            representations: vec![Representation::Hashed, Representation::Tfidf],
            reducers: vec![ReductionMethod::Svd, ReductionMethod::Umap],
            components: vec![2],
            algorithms: vec![ClusterAlgorithm::Kmeans, ClusterAlgorithm::AgglomerativeWard],
            ks: vec![3, 30],
            seeds: vec![1],
        }
    }

    fn opts(exec: Execution) -> SweepOptions {
        let mut o = SweepOptions {
            exec,
            ..SweepOptions::default()
        };
        o.umap.n_epochs = 50;
        o.representation.tfidf.min_df = 1;
        o
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let c = corpus();
        let strip = |mut v: Vec<SweepRecord>| {
            v.iter_mut().for_each(|r| r.runtime_ms = 0.0);
            v
        };
        let seq = strip(run_sweep(&c, &grid(), &opts(Execution::Sequential)).unwrap());
        let par = strip(run_sweep(&c, &grid(), &opts(Execution::Parallel)).unwrap());
        assert_eq!(seq.len(), 16);
        assert_eq!(seq, par);
    }

    #[test]
    fn oversized_k_is_recorded_not_fatal() {
        let records = run_sweep(&corpus(), &grid(), &opts(Execution::default())).unwrap();
        for r in &records {
            assert_eq!(r.error.is_some(), r.config.k == 30, "{}: {:?}", r.config, r.error);
        }
        let table = rank_aggregate(records).unwrap();
        assert_eq!(table.winner().config.k, 3);
        assert!(table.records.iter().rev().take(8).all(|r| r.error.is_some()));
    }

    #[test]
    fn seeds_are_averaged() {
        let mut g = grid();
        g.ks = vec![3];
        g.seeds = vec![1, 2];
        let records = run_sweep(&corpus(), &g, &opts(Execution::default())).unwrap();
        assert_eq!(records.len(), 8);
        assert!(records.iter().all(|r| r.error.is_none() && r.metrics.sil.is_defined()));
    }
}
