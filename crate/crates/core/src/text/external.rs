//! Client for an out-of-process sentence-embedding service.
//!
//! Wire contract: `POST {"texts": [..]}` answered by
//! `{"vectors": [[..], ..], "dims": d, "model": ".."}`.

use super::{l2_normalize_rows, DocumentMatrix, Representation, RowNorm, TextError};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEndpointConfig {
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    pub batch_size: usize,
    pub timeout_secs: u64,
    #[serde(default, skip_serializing)]
    pub auth_token: Option<String>,
}

impl EmbeddingEndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EmbeddingEndpointConfig {
            url: url.into(),
            model_name: Some("all-MiniLM-L6-v2".into()),
            batch_size: 32,
            timeout_secs: 30,
            auth_token: None,
        }
    }

    /// Endpoint from `ELIOT_EMBED_URL`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var("ELIOT_EMBED_URL").ok().filter(|u| !u.is_empty()).map(Self::new)
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Debug, Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    #[serde(default)]
    dims: Option<usize>,
    #[serde(default)]
    #[allow(dead_code)]
    model: Option<String>,
}

pub trait EmbeddingTransport: Send + Sync {
    /// POSTs a JSON body, returning `(status, body)`.
    fn post_json(&self, cfg: &EmbeddingEndpointConfig, body: Vec<u8>) -> Result<(u16, Vec<u8>), String>;
}

#[derive(Default)]
pub struct HttpEmbeddingTransport;

impl EmbeddingTransport for HttpEmbeddingTransport {
    fn post_json(&self, cfg: &EmbeddingEndpointConfig, body: Vec<u8>) -> Result<(u16, Vec<u8>), String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        let mut req = agent.post(&cfg.url).header("content-type", "application/json");
        if let Some(token) = &cfg.auth_token {
            req = req.header("authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send(&body[..]).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let bytes = resp.body_mut().read_to_vec().map_err(|e| e.to_string())?;
        Ok((status, bytes))
    }
}

/// Embeds `texts` in batches, restoring input order. Rows are L2-normalized
/// locally regardless of what the service returns.
pub fn embed_external(
    texts: &[String],
    cfg: &EmbeddingEndpointConfig,
    transport: &dyn EmbeddingTransport,
) -> Result<DocumentMatrix, TextError> {
    if cfg.batch_size == 0 {
        return Err(TextError::InvalidParams("batch_size must be >= 1".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(texts.len());
    let mut dims: Option<usize> = None;
    for batch in texts.chunks(cfg.batch_size) {
        let body = serde_json::to_vec(&EmbedRequest { texts: batch }).expect("request serializes");
        let (status, bytes) = transport.post_json(cfg, body).map_err(TextError::EmbeddingEndpoint)?;
        if status != 200 {
            return Err(TextError::EmbeddingEndpoint(format!("HTTP {status}")));
        }
        let resp: EmbedResponse =
            serde_json::from_slice(&bytes).map_err(|e| TextError::Protocol(format!("bad response body: {e}")))?;
        if resp.vectors.len() != batch.len() {
            return Err(TextError::Protocol(format!(
                "{} vectors returned for {} inputs",
                resp.vectors.len(),
                batch.len()
            )));
        }
        for v in resp.vectors {
            let expected = *dims.get_or_insert(v.len());
            if v.len() != expected || resp.dims.is_some_and(|d| d != v.len()) {
                return Err(TextError::Protocol(format!("vector of length {} where {expected} expected", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(TextError::Protocol("non-finite vector entry".into()));
            }
            rows.push(v);
        }
    }
    let d = dims.unwrap_or(0);
    if d == 0 && !texts.is_empty() {
        return Err(TextError::Protocol("zero-length vectors".into()));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let mut values = Array2::from_shape_vec((texts.len(), d), flat).expect("shape checked above");
    l2_normalize_rows(&mut values);
    Ok(DocumentMatrix::new(values, Representation::External, RowNorm::L2))
}
