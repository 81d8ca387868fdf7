use super::{ConfigTuple, SweepError, SweepMetrics, SweepRecord};
use crate::cluster::ClusterAlgorithm;
use crate::metrics::Metric;
use crate::reduce::ReductionMethod;
use crate::text::Representation;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

/// Whether a larger value of each metric (CHI, DBI, SIL, C_V, C_NPMI) is better.
const HIGHER_IS_BETTER: [bool; 5] = [true, false, true, true, true];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRanks {
    pub chi: f64,
    pub dbi: f64,
    pub sil: f64,
    pub c_v: f64,
    pub c_npmi: f64,
}

impl MetricRanks {
    pub fn sum(&self) -> f64 {
        self.chi + self.dbi + self.sil + self.c_v + self.c_npmi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub dataset: String,
    /// Best first.
    pub records: Vec<SweepRecord>,
    /// Mean min-max-normalized score of each record, aligned with `records`.
    pub tie_scores: Vec<f64>,
}

impl RankTable {
    pub fn winner(&self) -> &SweepRecord {
        &self.records[0]
    }
}

/// Sortable value: infinities keep their sign, undefined metrics are `None`.
fn rank_value(m: &Metric) -> Option<f64> {
    match m {
        Metric::Ok { value } if value.is_finite() => Some(*value),
        Metric::Ok { .. } | Metric::Undefined { .. } => None,
        Metric::Infinite => Some(f64::INFINITY),
    }
}

/// Fractional ranks (1 = best). Equal values share the mean of their
/// positions; undefined values all share the trailing positions.
fn fractional_ranks(values: &[Option<f64>], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    let cmp = |a: &Option<f64>, b: &Option<f64>| match (a, b) {
        (Some(x), Some(y)) => {
            let o = x.partial_cmp(y).unwrap_or(Ordering::Equal);
            if higher_is_better {
                o.reverse()
            } else {
                o
            }
        }
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    order.sort_by(|&i, &j| cmp(&values[i], &values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && cmp(&values[order[start]], &values[order[end]]) == Ordering::Equal {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Mean over the five metrics of per-metric min-max-normalized values,
/// oriented so 1 is best. Undefined metrics score 0; a metric constant
/// over the set scores 1.
pub fn normalized_scores(metrics: &[&SweepMetrics]) -> Vec<f64> {
    let mut totals = vec![0.0; metrics.len()];
    for (m, &higher) in HIGHER_IS_BETTER.iter().enumerate() {
        let vals: Vec<Option<f64>> = metrics.iter().map(|s| rank_value(s.as_array()[m])).collect();
        let finite: Vec<f64> = vals.iter().flatten().copied().filter(|v| v.is_finite()).collect();
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (t, v) in totals.iter_mut().zip(&vals) {
            let score = match *v {
                None => 0.0,
                Some(v) if v.is_infinite() => {
                    if higher {
                        1.0
                    } else {
                        0.0
                    }
                }
                Some(v) if hi > lo => {
                    let s = (v - lo) / (hi - lo);
                    if higher {
                        s
                    } else {
                        1.0 - s
                    }
                }
                Some(_) => 1.0,
            };
            *t += score;
        }
    }
    totals.iter().map(|t| t / HIGHER_IS_BETTER.len() as f64).collect()
}

/// Ranks each metric over the records, sums the ranks and orders the
/// records by aggregate (lower is better). Aggregate ties go to the higher
/// normalized score, then to the smaller configuration.
pub fn rank_aggregate(records: Vec<SweepRecord>) -> Result<RankTable, SweepError> {
    let Some(first) = records.first() else {
        return Err(SweepError::InvalidParams("no sweep records to rank".into()));
    };
    let dataset = first.dataset.clone();
    if let Some(r) = records.iter().find(|r| r.dataset != dataset) {
        return Err(SweepError::InvalidParams(format!(
            "records mix corpora {dataset:?} and {:?}",
            r.dataset
        )));
    }
    let distinct: BTreeSet<ConfigTuple> = records.iter().map(|r| r.config).collect();
    if distinct.len() != records.len() {
        return Err(SweepError::InvalidParams("duplicate configuration in sweep records".into()));
    }

    let per_metric: Vec<Vec<f64>> = HIGHER_IS_BETTER
        .iter()
        .enumerate()
        .map(|(m, &higher)| {
            let vals: Vec<Option<f64>> = records.iter().map(|r| rank_value(r.metrics.as_array()[m])).collect();
            fractional_ranks(&vals, higher)
        })
        .collect();
    let scores = normalized_scores(&records.iter().map(|r| &r.metrics).collect::<Vec<_>>());

    let mut ranked: Vec<(SweepRecord, f64)> = records
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            let ranks = MetricRanks {
                chi: per_metric[0][i],
                dbi: per_metric[1][i],
                sil: per_metric[2][i],
                c_v: per_metric[3][i],
                c_npmi: per_metric[4][i],
            };
            r.aggregate = Some(ranks.sum());
            r.ranks = Some(ranks);
            (r, scores[i])
        })
        .collect();
    ranked.sort_by(|(a, sa), (b, sb)| {
        a.aggregate
            .partial_cmp(&b.aggregate)
            .unwrap_or(Ordering::Equal)
            .then(sb.partial_cmp(sa).unwrap_or(Ordering::Equal))
            .then(a.config.cmp(&b.config))
    });
    let (records, tie_scores) = ranked.into_iter().unzip();
    Ok(RankTable {
        dataset,
        records,
        tie_scores,
    })
}

/// Most frequent value of each axis among per-corpus winners. K is left to
/// the user and not part of the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultConfig {
    pub representation: Representation,
    pub reducer: ReductionMethod,
    pub n_components: usize,
    pub algorithm: ClusterAlgorithm,
    /// Per axis, how many winners carry each value.
    pub support: BTreeMap<String, BTreeMap<String, usize>>,
}

fn most_frequent<T: Ord + Copy>(values: &[T], scores: &[f64]) -> (T, BTreeMap<T, usize>) {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    let mut score_sum: BTreeMap<T, f64> = BTreeMap::new();
    for (v, s) in values.iter().zip(scores) {
        *counts.entry(*v).or_default() += 1;
        *score_sum.entry(*v).or_default() += s;
    }
    let mean = |v: &T| score_sum[v] / counts[v] as f64;
    // BTreeMap iteration is ascending, so a full tie keeps the smallest value.
    let mut best: Option<T> = None;
    for v in counts.keys() {
        best = match best {
            None => Some(*v),
            Some(b) => {
                let better = counts[v] > counts[&b] || (counts[v] == counts[&b] && mean(v) > mean(&b));
                Some(if better { *v } else { b })
            }
        };
    }
    (best.expect("non-empty winners"), counts)
}

/// Derives the default configuration from the winners of several corpora.
/// Frequency ties are resolved by the mean normalized score of the winners
/// holding each value.
pub fn component_frequency_default(winners: &[(ConfigTuple, SweepMetrics)]) -> Result<DefaultConfig, SweepError> {
    if winners.is_empty() {
        return Err(SweepError::InvalidParams("no winners given".into()));
    }
    let scores = normalized_scores(&winners.iter().map(|(_, m)| m).collect::<Vec<_>>());
    let configs: Vec<ConfigTuple> = winners.iter().map(|(c, _)| *c).collect();
    let axis = |name: &str, counts: BTreeMap<String, usize>, support: &mut BTreeMap<String, BTreeMap<String, usize>>| {
        support.insert(name.to_string(), counts);
    };
    let mut support = BTreeMap::new();

    let (representation, c) = most_frequent(&configs.iter().map(|c| c.representation).collect::<Vec<_>>(), &scores);
    axis("representation", c.into_iter().map(|(k, v)| (k.as_str().to_string(), v)).collect(), &mut support);
    let (reducer, c) = most_frequent(&configs.iter().map(|c| c.reducer).collect::<Vec<_>>(), &scores);
    axis("reducer", c.into_iter().map(|(k, v)| (k.as_str().to_string(), v)).collect(), &mut support);
    let (n_components, c) = most_frequent(&configs.iter().map(|c| c.n_components).collect::<Vec<_>>(), &scores);
    axis("n_components", c.into_iter().map(|(k, v)| (k.to_string(), v)).collect(), &mut support);
    let (algorithm, c) = most_frequent(&configs.iter().map(|c| c.algorithm).collect::<Vec<_>>(), &scores);
    axis("algorithm", c.into_iter().map(|(k, v)| (k.as_str().to_string(), v)).collect(), &mut support);

    Ok(DefaultConfig {
        representation,
        reducer,
        n_components,
        algorithm,
        support,
    })
}
