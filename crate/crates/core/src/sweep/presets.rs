use crate::arxiv::QuerySpec;
use serde::{Deserialize, Serialize};

/// A bundled domain query used for offline configuration evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub id: String,
    /// Short corpus name used in sweep reports.
    pub dataset: String,
    pub area: String,
    pub topic: String,
    /// Corpus size observed when the preset was first harvested.
    pub reference_doc_count: usize,
    pub query: QuerySpec,
}

const RAW: [&str; 8] = [
    include_str!("../../presets/01-cs.json"),
    include_str!("../../presets/02-physics.json"),
    include_str!("../../presets/03-eess.json"),
    include_str!("../../presets/04-math.json"),
    include_str!("../../presets/05-stat.json"),
    include_str!("../../presets/06-q-bio.json"),
    include_str!("../../presets/07-q-fin.json"),
    include_str!("../../presets/08-econ.json"),
];

/// The eight domain presets, in a fixed order.
pub fn presets() -> Vec<Preset> {
    RAW.iter()
        .map(|raw| serde_json::from_str(raw).expect("bundled preset is valid JSON"))
        .collect()
}
