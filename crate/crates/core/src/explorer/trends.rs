use crate::arxiv::PaperRecord;
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTrend {
    pub cluster_id: i64,
    /// Papers per publication year, zero-filled over the displayed range.
    pub counts: BTreeMap<i32, usize>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub paper_index: usize,
    pub arxiv_id: String,
    pub date: NaiveDate,
    pub cluster_id: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    /// Inclusive year range covered by `counts`.
    pub years: Option<(i32, i32)>,
    /// Clusters in ascending id order; the noise series (`-1`) comes first when present.
    pub clusters: Vec<ClusterTrend>,
    pub points: Vec<TrendPoint>,
}

impl TrendSeries {
    pub fn total(&self) -> usize {
        self.clusters.iter().map(|c| c.counts.values().sum::<usize>()).sum()
    }
}

/// Buckets papers by cluster and publication year. The year range spans
/// the query window when given, widened to any paper outside it so that
/// counts always add up to the corpus size.
pub fn temporal_series(labels: &[i64], papers: &[PaperRecord], window: (Option<NaiveDate>, Option<NaiveDate>)) -> TrendSeries {
    assert_eq!(labels.len(), papers.len(), "assignment must align with papers");
    let points: Vec<TrendPoint> = papers
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (p, &l))| TrendPoint {
            paper_index: i,
            arxiv_id: p.arxiv_id.clone(),
            date: p.published.date_naive(),
            cluster_id: l,
        })
        .collect();

    let data_years = points.iter().map(|p| p.date.year());
    let lo = window.0.map(|d| d.year()).into_iter().chain(data_years.clone()).min();
    let hi = window.1.map(|d| d.year()).into_iter().chain(data_years).max();
    let years = lo.zip(hi);

    let mut by_cluster: BTreeMap<i64, BTreeMap<i32, usize>> = BTreeMap::new();
    for p in &points {
        by_cluster.entry(p.cluster_id).or_default();
    }
    for counts in by_cluster.values_mut() {
        if let Some((a, b)) = years {
            counts.extend((a..=b).map(|y| (y, 0)));
        }
    }
    for p in &points {
        *by_cluster.get_mut(&p.cluster_id).expect("seeded above").entry(p.date.year()).or_default() += 1;
    }
    let clusters = by_cluster
        .into_iter()
        .map(|(cluster_id, counts)| ClusterTrend {
            cluster_id,
            total: counts.values().sum(),
            counts,
        })
        .collect();
    TrendSeries { years, clusters, points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arxiv::test_support::record;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn paper(i: usize, year: i32) -> PaperRecord {
        let mut p = record(&format!("2401.{i:05}"), 1, 1);
        p.published = Utc.with_ymd_and_hms(year, 6, 1, 0, 0, 0).unwrap();
        p
    }

    #[test]
    fn counts_per_year_with_zero_fill() {
        let papers = vec![paper(0, 2024), paper(1, 2024), paper(2, 2025), paper(3, 2026)];
        let window = (NaiveDate::from_ymd_opt(2024, 4, 1), NaiveDate::from_ymd_opt(2026, 4, 30));
        let s = temporal_series(&[0, 0, 0, 1], &papers, window);
        assert_eq!(s.years, Some((2024, 2026)));
        assert_eq!(s.clusters[0].counts, BTreeMap::from([(2024, 2), (2025, 1), (2026, 0)]));
        assert_eq!(s.clusters[1].total, 1);
        assert_eq!(s.points[3].cluster_id, 1);
    }

    #[test]
    fn all_noise_gives_one_series() {
        let papers = vec![paper(0, 2024), paper(1, 2025)];
        let s = temporal_series(&[-1, -1], &papers, (None, None));
        assert_eq!(s.clusters.len(), 1);
        assert_eq!(s.clusters[0].cluster_id, -1);
        assert_eq!(s.years, Some((2024, 2025)));
    }

    proptest! {
        #[test]
        fn counts_conserve_corpus(rows in prop::collection::vec((2020i32..2027, -1i64..4), 0..40)) {
            let papers: Vec<PaperRecord> = rows.iter().enumerate().map(|(i, (y, _))| paper(i, *y)).collect();
            let labels: Vec<i64> = rows.iter().map(|r| r.1).collect();
            let s = temporal_series(&labels, &papers, (NaiveDate::from_ymd_opt(2022, 1, 1), None));
            prop_assert_eq!(s.total(), papers.len());
            prop_assert_eq!(s.points.len(), papers.len());
            for c in &s.clusters {
                prop_assert_eq!(c.total, labels.iter().filter(|&&l| l == c.cluster_id).count());
            }
        }
    }
}
