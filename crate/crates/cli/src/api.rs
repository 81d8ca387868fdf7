//! JSON API consumed by the browser client.

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use eliot_core::explorer::{ExplorationResult, ExploreRequest, Explorer, PipelineConfig, PipelineError, Stage};
use eliot_core::sweep::presets;
use serde_json::json;
use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

/// Results kept in memory for `GET /api/result/{id}` when no cache directory is set.
const RECENT_CAPACITY: usize = 64;

#[derive(Default)]
struct Recent {
    order: VecDeque<String>,
    by_id: HashMap<String, ExplorationResult>,
}

impl Recent {
    fn insert(&mut self, r: &ExplorationResult) {
        if self.by_id.insert(r.result_id.clone(), r.clone()).is_none() {
            self.order.push_back(r.result_id.clone());
        }
        while self.order.len() > RECENT_CAPACITY {
            if let Some(old) = self.order.pop_front() {
                self.by_id.remove(&old);
            }
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    explorer: Explorer,
    base: PipelineConfig,
    recent: Arc<Mutex<Recent>>,
}

impl AppState {
    pub fn new(explorer: Explorer, base: PipelineConfig) -> Self {
        AppState {
            explorer,
            base,
            recent: Arc::default(),
        }
    }
}

pub struct ApiError(StatusCode, serde_json::Value);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::InvalidConfig(_) => StatusCode::BAD_REQUEST,
            PipelineError::TooFewDocuments { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            PipelineError::Stage { stage: Stage::Fetch, .. } => StatusCode::BAD_GATEWAY,
            PipelineError::Stage { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, json!({ "error": e.to_string(), "stage": e.stage().map(Stage::as_str) }))
    }
}

async fn explore(State(state): State<AppState>, Json(req): Json<ExploreRequest>) -> Result<Json<ExplorationResult>, ApiError> {
    let (spec, cfg) = req.resolve(&state.base)?;
    let explorer = state.explorer.clone();
    let result = tokio::task::spawn_blocking(move || explorer.run_pipeline(&spec, &cfg))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": e.to_string(), "stage": null })))??;
    state.recent.lock().expect("recent results lock").insert(&result);
    Ok(Json(result))
}

async fn result(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<ExplorationResult>, ApiError> {
    let recent = state.recent.lock().expect("recent results lock").by_id.get(&id).cloned();
    recent
        .or_else(|| state.explorer.result(&id))
        .map(Json)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, json!({ "error": format!("no result {id}"), "stage": null })))
}

async fn list_presets() -> Json<serde_json::Value> {
    Json(json!(presets()))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/explore", post(explore))
        .route("/api/result/{id}", get(result))
        .route("/api/presets", get(list_presets))
        .route("/api/health", get(health))
        .with_state(state)
}
