//! HTTP/JSON front end for `binpack3d-core`.
//!
//! Batch operations (generation, episodes, benchmarks, validation, MILP
//! export) run on the blocking pool. Online packing is exposed as sessions:
//! the caller announces boxes as they reach the conveyor window and gets one
//! committed placement per step.

mod error;
mod session;

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::sync::Mutex;

use binpack3d_core::api::{
    BenchRequest, BenchResponse, CollectionResponse, EpisodeRequest, IndustrialRequest, MilpExportResponse,
    SessionCreated, SessionRequest, SessionState, StepRequest, StepResponse, SyntheticRequest,
};
use binpack3d_core::sim::{
    episode_models, gen_industrial_like, gen_synthetic, run_bench, run_episode, summarize, validate_trace,
    EpisodeMetrics, SyntheticCollection, Trace, ValidationReport,
};

pub use error::ApiError;
use session::Session;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<std::sync::Mutex<Session>>>>>,
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/collections/synthetic", post(synthetic))
        .route("/v1/collections/industrial", post(industrial))
        .route("/v1/episodes", post(episode))
        .route("/v1/bench", post(bench))
        .route("/v1/validate", post(validate))
        .route("/v1/milp", post(milp))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session).delete(delete_session))
        .route("/v1/sessions/{id}/step", post(step_session))
        .with_state(AppState::default())
}

async fn health() -> &'static str {
    "ok"
}

async fn blocking<T, F>(f: F) -> Result<Json<T>, ApiError>
where
    F: FnOnce() -> binpack3d_core::Result<T> + Send + 'static,
    T: Send + 'static,
{
    let out = tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(out))
}

async fn synthetic(Json(req): Json<SyntheticRequest>) -> Result<Json<SyntheticCollection>, ApiError> {
    blocking(move || gen_synthetic(req.bin, req.n_bins, req.min_side, req.max_side, req.seed)).await
}

async fn industrial(Json(req): Json<IndustrialRequest>) -> Result<Json<CollectionResponse>, ApiError> {
    blocking(move || Ok(CollectionResponse { boxes: gen_industrial_like(req.bin_type, req.target_bins, req.seed)? }))
        .await
}

async fn episode(Json(req): Json<EpisodeRequest>) -> Result<Json<EpisodeMetrics>, ApiError> {
    blocking(move || run_episode(&req.collection, &req.config, req.seed)).await
}

async fn bench(Json(req): Json<BenchRequest>) -> Result<Json<BenchResponse>, ApiError> {
    blocking(move || {
        let episodes = run_bench(&req.spec, &req.collections)?;
        let rows: Vec<_> = episodes.iter().map(|e| e.row.clone()).collect();
        Ok(BenchResponse { summary: summarize(&rows), episodes })
    })
    .await
}

async fn validate(Json(trace): Json<Trace>) -> Result<Json<ValidationReport>, ApiError> {
    blocking(move || Ok(validate_trace(&trace))).await
}

async fn milp(Json(req): Json<EpisodeRequest>) -> Result<Json<MilpExportResponse>, ApiError> {
    blocking(move || {
        let (files, metrics) = episode_models(&req.collection, &req.config, req.seed)?;
        Ok(MilpExportResponse { files, boxes_packed: metrics.boxes_packed })
    })
    .await
}

async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<SessionRequest>,
) -> Result<Json<SessionCreated>, ApiError> {
    let session = Session::new(&req)?;
    let id = uuid::Uuid::new_v4().to_string();
    state.sessions.lock().await.insert(id.clone(), Arc::new(std::sync::Mutex::new(session)));
    tracing::debug!(%id, "session opened");
    Ok(Json(SessionCreated { id }))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    let s = lookup(&state, &id).await?;
    let guard = s.lock().map_err(|_| ApiError::internal("session poisoned"))?;
    Ok(Json(guard.state(&id)))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    let s = state.sessions.lock().await.remove(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let guard = s.lock().map_err(|_| ApiError::internal("session poisoned"))?;
    Ok(Json(guard.finish(&id)))
}

async fn step_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<StepRequest>,
) -> Result<Json<StepResponse>, ApiError> {
    let s = lookup(&state, &id).await?;
    tokio::task::spawn_blocking(move || {
        let mut guard = s.lock().map_err(|_| ApiError::internal("session poisoned"))?;
        guard.step(req.arrivals).map(Json)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn lookup(state: &AppState, id: &str) -> Result<Arc<std::sync::Mutex<Session>>, ApiError> {
    state.sessions.lock().await.get(id).cloned().ok_or_else(|| ApiError::not_found(id))
}
