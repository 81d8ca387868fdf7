//! Query-time literature exploration: arXiv retrieval, document
//! representations, dimensionality reduction, clustering, c-TF-IDF keyword
//! labeling, cluster-quality and coherence metrics, temporal trends, and a
//! configuration-sweep harness with rank aggregation.

pub mod arxiv;
pub mod cluster;
pub mod exec;
pub mod explorer;
pub mod labeling;
pub mod metrics;
pub mod reduce;
pub mod sweep;
pub mod text;
