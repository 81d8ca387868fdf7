//! Configuration sweeps: grid enumeration, batch runs over corpora, rank
//! aggregation and the component-frequency default.

mod presets;
mod rank;
mod report;
mod run;

pub use presets::{presets, Preset};
pub use rank::{component_frequency_default, normalized_scores, rank_aggregate, DefaultConfig, MetricRanks, RankTable};
pub use report::{write_csv, CSV_COLUMNS};
pub use run::{run_sweep, SweepCorpus, SweepOptions};

use crate::cluster::ClusterAlgorithm;
use crate::metrics::Metric;
use crate::reduce::ReductionMethod;
use crate::text::Representation;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep parameter: {0}")]
    InvalidParams(String),
    #[error("sweep corpus {corpus}: {message}")]
    Corpus { corpus: String, message: String },
    #[error("writing sweep report: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing sweep report: {0}")]
    Csv(#[from] csv::Error),
}

/// K values evaluated by the full grid.
pub const FULL_KS: [usize; 11] = [3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 15];
pub const FULL_COMPONENTS: [usize; 3] = [5, 10, 15];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub representations: Vec<Representation>,
    pub reducers: Vec<ReductionMethod>,
    pub components: Vec<usize>,
    pub algorithms: Vec<ClusterAlgorithm>,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    /// The full grid over the given representations with a single seed.
    pub fn full(representations: &[Representation]) -> Self {
        SweepGrid {
            representations: representations.to_vec(),
            reducers: vec![ReductionMethod::Svd, ReductionMethod::Umap],
            components: FULL_COMPONENTS.to_vec(),
            algorithms: ClusterAlgorithm::USER_CONTROLLED.to_vec(),
            ks: FULL_KS.to_vec(),
            seeds: vec![42],
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let empty = [
            ("representations", self.representations.is_empty()),
            ("reducers", self.reducers.is_empty()),
            ("components", self.components.is_empty()),
            ("algorithms", self.algorithms.is_empty()),
            ("ks", self.ks.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((axis, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(SweepError::InvalidParams(format!("axis {axis} is empty")));
        }
        if let Some(a) = self.algorithms.iter().find(|a| **a == ClusterAlgorithm::Hdbscan) {
            return Err(SweepError::InvalidParams(format!("{} has no K and cannot be swept", a.as_str())));
        }
        if self.components.contains(&0) || self.ks.iter().any(|&k| k < 2) {
            return Err(SweepError::InvalidParams("components must be >= 1 and K >= 2".into()));
        }
        Ok(())
    }
}

/// One point of the grid. Field order fixes the lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConfigTuple {
    pub representation: Representation,
    pub reducer: ReductionMethod,
    pub n_components: usize,
    pub algorithm: ClusterAlgorithm,
    pub k: usize,
}

impl std::fmt::Display for ConfigTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}{}/{}/K={}",
            self.representation.as_str(),
            self.reducer.as_str(),
            self.n_components,
            self.algorithm.as_str(),
            self.k
        )
    }
}

/// Cartesian product of the grid axes, sorted and deduplicated.
pub fn enumerate_grid(grid: &SweepGrid) -> Result<Vec<ConfigTuple>, SweepError> {
    grid.validate()?;
    let mut out = Vec::new();
    for &representation in &grid.representations {
        for &reducer in &grid.reducers {
            for &n_components in &grid.components {
                for &algorithm in &grid.algorithms {
                    for &k in &grid.ks {
                        out.push(ConfigTuple {
                            representation,
                            reducer,
                            n_components,
                            algorithm,
                            k,
                        });
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetrics {
    pub chi: Metric,
    pub dbi: Metric,
    pub sil: Metric,
    pub c_v: Metric,
    pub c_npmi: Metric,
}

impl SweepMetrics {
    pub fn from_values(chi: f64, dbi: f64, sil: f64, c_v: f64, c_npmi: f64) -> Self {
        SweepMetrics {
            chi: Metric::value(chi),
            dbi: Metric::value(dbi),
            sil: Metric::value(sil),
            c_v: Metric::value(c_v),
            c_npmi: Metric::value(c_npmi),
        }
    }

    /// Every metric undefined, for a configuration that failed to run.
    pub fn failed(reason: &str) -> Self {
        let u = Metric::Undefined { reason: reason.to_string() };
        SweepMetrics {
            chi: u.clone(),
            dbi: u.clone(),
            sil: u.clone(),
            c_v: u.clone(),
            c_npmi: u,
        }
    }

    /// Metrics in ranking order: CHI, DBI, SIL, C_V, C_NPMI.
    pub fn as_array(&self) -> [&Metric; 5] {
        [&self.chi, &self.dbi, &self.sil, &self.c_v, &self.c_npmi]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub dataset: String,
    pub config: ConfigTuple,
    pub metrics: SweepMetrics,
    /// Why the configuration failed, if it did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runtime_ms: f64,
    /// Filled in by [`rank_aggregate`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<MetricRanks>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<f64>,
}

impl SweepRecord {
    pub fn new(dataset: impl Into<String>, config: ConfigTuple, metrics: SweepMetrics) -> Self {
        SweepRecord {
            dataset: dataset.into(),
            config,
            metrics,
            error: None,
            runtime_ms: 0.0,
            ranks: None,
            aggregate: None,
        }
    }
}
