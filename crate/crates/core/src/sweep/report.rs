use super::{RankTable, SweepError};
use crate::metrics::Metric;
use std::io::Write;

pub const CSV_COLUMNS: [&str; 12] = [
    "dataset",
    "representation",
    "reducer",
    "n_components",
    "K",
    "algorithm",
    "CHI",
    "DBI",
    "SIL",
    "C_V",
    "C_NPMI",
    "aggregate_rank",
];

fn cell(m: &Metric) -> String {
    match m {
        Metric::Ok { value } => format!("{value:.6}"),
        Metric::Infinite => "inf".to_string(),
        Metric::Undefined { .. } => String::new(),
    }
}

/// Writes one row per ranked record, best first within each corpus.
/// Undefined metrics are left empty.
pub fn write_csv<W: Write>(out: W, tables: &[RankTable]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for table in tables {
        for r in &table.records {
            let m = &r.metrics;
            w.write_record([
                r.dataset.clone(),
                r.config.representation.as_str().to_string(),
                r.config.reducer.as_str().to_string(),
                r.config.n_components.to_string(),
                r.config.k.to_string(),
                r.config.algorithm.as_str().to_string(),
                cell(&m.chi),
                cell(&m.dbi),
                cell(&m.sil),
                cell(&m.c_v),
                cell(&m.c_npmi),
                r.aggregate.map(|a| a.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterAlgorithm;
    use crate::reduce::ReductionMethod;
    use crate::sweep::{rank_aggregate, ConfigTuple, SweepMetrics, SweepRecord};
    use crate::text::Representation;

    #[test]
    fn csv_shape() {
        let c = ConfigTuple {
            representation: Representation::Hashed,
            reducer: ReductionMethod::Umap,
            n_components: 10,
            algorithm: ClusterAlgorithm::AgglomerativeWard,
            k: 4,
        };
        let mut bad = SweepRecord::new("fx", ConfigTuple { k: 5, ..c }, SweepMetrics::failed("boom"));
        bad.metrics.chi = Metric::Infinite;
        let table = rank_aggregate(vec![SweepRecord::new("fx", c, SweepMetrics::from_values(12.5, 0.8, 0.4, 0.5, -0.1)), bad]).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &[table]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.split(',').count() == 12));
        assert_eq!(lines[1], "fx,hashed,umap,10,4,agglomerative_ward,12.500000,0.800000,0.400000,0.500000,-0.100000,6");
        assert_eq!(lines[2], "fx,hashed,umap,10,5,agglomerative_ward,inf,,,,,9");
    }
}
