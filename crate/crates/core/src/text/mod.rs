//! Text normalization and document representations.

mod external;
mod hashed;
mod lexicon;
mod preprocess;
mod tfidf;

pub use external::{embed_external, EmbeddingEndpointConfig, EmbeddingTransport, HttpEmbeddingTransport};
pub use hashed::{embed_hashed, fnv1a_seeded, DEFAULT_HASHED_DIMS};
pub use lexicon::{is_stopword, lemmatize_sequence};
pub use preprocess::{clean_text, preprocess, preprocess_papers, PreprocessedDoc};
pub use tfidf::{fit_tfidf, TfidfModel, TfidfParams};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum TextError {
    #[error("document has neither title nor abstract text")]
    EmptyDocument,
    #[error("vocabulary is empty after the {filter} filter")]
    DegenerateVocabulary { filter: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("embedding endpoint: {0}")]
    EmbeddingEndpoint(String),
    #[error("embedding protocol: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Sentence-embedding vectors from an external endpoint.
    External,
    /// Signed feature hashing of unigrams and bigrams.
    Hashed,
    Tfidf,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::External => "external",
            Representation::Hashed => "hashed",
            Representation::Tfidf => "tfidf",
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "external" | "embedding" | "minilm" => Ok(Representation::External),
            "hashed" => Ok(Representation::Hashed),
            "tfidf" | "tf-idf" => Ok(Representation::Tfidf),
            other => Err(format!("unknown representation {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowNorm {
    None,
    L2,
}

/// Dense `n x d` document vectors, row-aligned with the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentMatrix {
    pub values: Array2<f64>,
    pub representation: Representation,
    pub norm: RowNorm,
}

impl DocumentMatrix {
    pub fn new(values: Array2<f64>, representation: Representation, norm: RowNorm) -> Self {
        DocumentMatrix {
            values,
            representation,
            norm,
        }
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dims(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Which representation to build, with the knobs of each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationConfig {
    pub kind: Representation,
    #[serde(default = "default_hashed_dims")]
    pub hashed_dims: usize,
    #[serde(default)]
    pub tfidf: TfidfParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<EmbeddingEndpointConfig>,
}

fn default_hashed_dims() -> usize {
    DEFAULT_HASHED_DIMS
}

impl RepresentationConfig {
    pub fn of(kind: Representation) -> Self {
        RepresentationConfig {
            kind,
            hashed_dims: DEFAULT_HASHED_DIMS,
            tfidf: TfidfParams::default(),
            endpoint: None,
        }
    }

    /// External embeddings when `ELIOT_EMBED_URL` is set, hashed vectors otherwise.
    pub fn from_env() -> Self {
        match EmbeddingEndpointConfig::from_env() {
            Some(ep) => RepresentationConfig {
                endpoint: Some(ep),
                ..Self::of(Representation::External)
            },
            None => Self::of(Representation::Hashed),
        }
    }
}

/// Builds the configured document matrix over the HTTP embedding transport.
pub fn represent(docs: &[PreprocessedDoc], cfg: &RepresentationConfig) -> Result<DocumentMatrix, TextError> {
    represent_with(docs, cfg, &HttpEmbeddingTransport)
}

pub fn represent_with(
    docs: &[PreprocessedDoc],
    cfg: &RepresentationConfig,
    transport: &dyn EmbeddingTransport,
) -> Result<DocumentMatrix, TextError> {
    match cfg.kind {
        Representation::Tfidf => fit_tfidf(docs, &cfg.tfidf).map(|(_, m)| m),
        Representation::Hashed => embed_hashed(docs, cfg.hashed_dims),
        Representation::External => {
            let ep = cfg
                .endpoint
                .as_ref()
                .ok_or_else(|| TextError::EmbeddingEndpoint("no endpoint configured (set ELIOT_EMBED_URL)".into()))?;
            let texts: Vec<String> = docs.iter().map(|d| d.raw.clone()).collect();
            embed_external(&texts, ep, transport)
        }
    }
}

/// Scales every nonzero row to unit Euclidean length.
pub fn l2_normalize_rows(values: &mut Array2<f64>) {
    for mut row in values.rows_mut() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
}

/// Tokens a vectorizer keeps: at least two characters, at least one
/// letter, and not a stopword.
pub fn is_content_token(token: &str) -> bool {
    token.chars().count() >= 2 && token.chars().any(char::is_alphabetic) && !is_stopword(token)
}

/// Content tokens of a document, in order.
pub fn content_tokens(doc: &PreprocessedDoc) -> Vec<&str> {
    doc.tokens.iter().map(String::as_str).filter(|t| is_content_token(t)).collect()
}

/// Word n-grams of orders `lo..=hi`, joined by single spaces.
pub fn ngrams(tokens: &[&str], lo: usize, hi: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in lo.max(1)..=hi {
        if n > tokens.len() {
            break;
        }
        for w in tokens.windows(n) {
            out.push(w.join(" "));
        }
    }
    out
}
