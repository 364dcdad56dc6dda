//! Long-running recommendation service.
//!
//! Queries are answered from the snapshot currently held in a
//! [`SnapshotSlot`]. Rebuilds run on a blocking worker, at most one at a
//! time, and replace the slot's contents with a single pointer swap, so a
//! query sees either the old generation or the new one in full and never
//! waits for a build.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use ars_core::{recommend, recommend_for_path, GraphSnapshot, ObjectId, RecommendationVector, SeedSet};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;

use crate::config::ServiceConfig;
use crate::edge_list::{load_graph, save_build};
use crate::error::{Error, Result};
use crate::ingest::{build_graph, load_allowed_objects, BuildOutput, IngestReport, KeyTables};

/// One published snapshot.
#[derive(Debug)]
pub struct Generation {
    pub number: u64,
    pub snapshot: GraphSnapshot,
    pub keys: Option<KeyTables>,
    pub report: Option<IngestReport>,
}

/// Result of the most recent rebuild attempt.
#[derive(Debug, Clone, Serialize)]
pub struct RebuildOutcome {
    pub ok: bool,
    pub generation: u64,
    pub error: Option<String>,
    pub report: Option<IngestReport>,
}

#[derive(Debug, thiserror::Error)]
pub enum RebuildError {
    #[error("a rebuild is already in progress")]
    Busy,
    #[error("rebuild failed: {0}")]
    Failed(Error),
}

/// Holds the current generation. Readers clone an `Arc` out of it; the
/// single rebuild writer swaps in a new one.
#[derive(Debug, Default)]
pub struct SnapshotSlot {
    current: RwLock<Option<Arc<Generation>>>,
    busy: AtomicBool,
    last: Mutex<Option<RebuildOutcome>>,
}

impl SnapshotSlot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn current(&self) -> Option<Arc<Generation>> {
        self.current.read().expect("slot lock poisoned").clone()
    }

    /// Current generation number; 0 before the first snapshot.
    pub fn generation(&self) -> u64 {
        self.current().map_or(0, |g| g.number)
    }

    pub fn last_outcome(&self) -> Option<RebuildOutcome> {
        self.last.lock().expect("outcome lock poisoned").clone()
    }

    fn publish(&self, snapshot: GraphSnapshot, keys: Option<KeyTables>, report: Option<IngestReport>) -> u64 {
        let mut guard = self.current.write().expect("slot lock poisoned");
        let number = guard.as_ref().map_or(0, |g| g.number) + 1;
        *guard = Some(Arc::new(Generation {
            number,
            snapshot,
            keys,
            report,
        }));
        number
    }

    /// Publishes a snapshot built elsewhere (e.g. loaded from disk).
    pub fn install(&self, snapshot: GraphSnapshot, keys: Option<KeyTables>) -> Result<u64, RebuildError> {
        self.exclusive(|| Ok(BuildOutputOrLoaded::Loaded(snapshot, keys)))
    }

    /// Runs `build` and publishes its snapshot. A second call while one is
    /// running is rejected with [`RebuildError::Busy`]; a failed build
    /// leaves the current generation in place.
    pub fn trigger_rebuild<F>(&self, build: F) -> Result<u64, RebuildError>
    where
        F: FnOnce() -> Result<BuildOutput>,
    {
        self.exclusive(|| build().map(BuildOutputOrLoaded::Built))
    }

    fn exclusive<F>(&self, produce: F) -> Result<u64, RebuildError>
    where
        F: FnOnce() -> Result<BuildOutputOrLoaded>,
    {
        if self
            .busy
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .is_err()
        {
            return Err(RebuildError::Busy);
        }
        let _release = BusyGuard(&self.busy);
        let outcome = match produce() {
            Ok(BuildOutputOrLoaded::Built(out)) => {
                let report = out.report.clone();
                let number = self.publish(out.snapshot, Some(out.keys), Some(out.report));
                Ok((number, Some(report)))
            }
            Ok(BuildOutputOrLoaded::Loaded(snapshot, keys)) => Ok((self.publish(snapshot, keys, None), None)),
            Err(e) => Err(e),
        };
        let mut last = self.last.lock().expect("outcome lock poisoned");
        match outcome {
            Ok((number, report)) => {
                *last = Some(RebuildOutcome {
                    ok: true,
                    generation: number,
                    error: None,
                    report,
                });
                Ok(number)
            }
            Err(e) => {
                *last = Some(RebuildOutcome {
                    ok: false,
                    generation: self.generation(),
                    error: Some(e.to_string()),
                    report: None,
                });
                Err(RebuildError::Failed(e))
            }
        }
    }
}

enum BuildOutputOrLoaded {
    Built(BuildOutput),
    Loaded(GraphSnapshot, Option<KeyTables>),
}

struct BusyGuard<'a>(&'a AtomicBool);

impl Drop for BusyGuard<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::Release);
    }
}

pub type BuildFn = Arc<dyn Fn() -> Result<BuildOutput> + Send + Sync>;

/// Shared state of the HTTP handlers.
pub struct AppState {
    pub slot: Arc<SnapshotSlot>,
    pub build: BuildFn,
    pub default_limit: usize,
    pub use_weights: bool,
}

impl AppState {
    pub fn new(build: BuildFn, default_limit: usize, use_weights: bool) -> Self {
        AppState {
            slot: Arc::new(SnapshotSlot::new()),
            build,
            default_limit,
            use_weights,
        }
    }

    /// Rebuilds from the configured sources and, when `edge_list` is set,
    /// persists the result before it is published.
    pub fn from_config(config: &ServiceConfig) -> Self {
        let sources = config.sources.clone();
        let allowed = config.allowed_objects.clone();
        let edge_list = config.edge_list.clone();
        let build: BuildFn = Arc::new(move || {
            let allowed = allowed.as_deref().map(load_allowed_objects).transpose()?;
            let out = build_graph(&sources, allowed)?;
            if let Some(path) = &edge_list {
                save_build(&out, path)?;
            }
            Ok(out)
        });
        AppState::new(build, config.default_limit, config.use_weights)
    }

    /// Runs a rebuild on the blocking pool.
    pub async fn rebuild(self: &Arc<Self>) -> Result<u64, RebuildError> {
        let state = Arc::clone(self);
        tokio::task::spawn_blocking(move || state.slot.trigger_rebuild(|| (state.build)()))
            .await
            .unwrap_or_else(|e| Err(RebuildError::Failed(Error::Service(e.to_string()))))
    }
}

#[derive(Debug, Default, Deserialize)]
struct QueryParams {
    top: Option<usize>,
    raw: Option<String>,
    weighted: Option<String>,
    path: Option<String>,
}

fn flag(v: &Option<String>) -> Option<bool> {
    v.as_deref().map(|s| matches!(s, "1" | "true" | "yes" | ""))
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn not_ready() -> ApiError {
    ApiError(
        StatusCode::SERVICE_UNAVAILABLE,
        "not ready: no snapshot built yet".into(),
    )
}

fn engine_error(e: ars_core::Error) -> ApiError {
    let status = match e {
        ars_core::Error::ObjectNotFound(_) | ars_core::Error::KernelNotFound(_) => StatusCode::NOT_FOUND,
        _ => StatusCode::BAD_REQUEST,
    };
    ApiError(status, e.to_string())
}

/// Resolves an id from the URL; with `raw` it is a raw object key.
fn resolve(generation: &Generation, id: &str, raw: bool) -> Result<ObjectId, ApiError> {
    if raw {
        let keys = generation
            .keys
            .as_ref()
            .ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, "raw keys unavailable for this snapshot".into()))?;
        keys.objects
            .id_of(id)
            .map(ObjectId)
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("object not found: {id}")))
    } else {
        id.parse::<u32>()
            .map(ObjectId)
            .map_err(|_| ApiError(StatusCode::BAD_REQUEST, format!("not an object id: {id:?}")))
    }
}

fn render_object(generation: &Generation, object: ObjectId, raw: bool) -> Value {
    match (raw, &generation.keys) {
        (true, Some(keys)) => keys.objects.raw_of(object.0).map_or(json!(object.0), |k| json!(k)),
        _ => json!(object.0),
    }
}

fn render_items(generation: &Generation, items: &RecommendationVector, raw: bool) -> Value {
    Value::Array(
        items
            .iter()
            .map(|s| json!({ "object": render_object(generation, s.object, raw), "score": s.score }))
            .collect(),
    )
}

async fn recommend_one(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<QueryParams>,
) -> Result<Json<Value>, ApiError> {
    let generation = state.slot.current().ok_or_else(not_ready)?;
    let raw = flag(&q.raw).unwrap_or(false);
    let weighted = flag(&q.weighted).unwrap_or(state.use_weights);
    let m = resolve(&generation, &id, raw)?;
    let items = recommend(
        &generation.snapshot,
        m,
        Some(q.top.unwrap_or(state.default_limit)),
        weighted,
    )
    .map_err(engine_error)?;
    Ok(Json(json!({
        "object": render_object(&generation, m, raw),
        "generation": generation.number,
        "items": render_items(&generation, &items, raw),
    })))
}

async fn recommend_path(
    State(state): State<Arc<AppState>>,
    Query(q): Query<QueryParams>,
) -> Result<Json<Value>, ApiError> {
    let generation = state.slot.current().ok_or_else(not_ready)?;
    let raw = flag(&q.raw).unwrap_or(false);
    let weighted = flag(&q.weighted).unwrap_or(state.use_weights);
    let path = q
        .path
        .as_deref()
        .ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, "missing path parameter".into()))?;
    let seeds = path
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| resolve(&generation, s, raw))
        .collect::<Result<Vec<_>, _>>()?;
    let seeds = SeedSet::new(seeds).map_err(engine_error)?;
    let items = recommend_for_path(
        &generation.snapshot,
        &seeds,
        Some(q.top.unwrap_or(state.default_limit)),
        weighted,
    )
    .map_err(engine_error)?;
    let path: Vec<Value> = seeds
        .as_slice()
        .iter()
        .map(|&o| render_object(&generation, o, raw))
        .collect();
    Ok(Json(json!({
        "path": path,
        "generation": generation.number,
        "items": render_items(&generation, &items, raw),
    })))
}

async fn stats(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let generation = state.slot.current().ok_or_else(not_ready)?;
    let mut body = serde_json::to_value(generation.snapshot.stats()).expect("stats serialize");
    body["generation"] = json!(generation.number);
    Ok(Json(body))
}

async fn healthz(State(state): State<Arc<AppState>>) -> Response {
    match state.slot.current() {
        Some(g) => Json(json!({ "status": "ok", "generation": g.number })).into_response(),
        None => (StatusCode::SERVICE_UNAVAILABLE, Json(json!({ "status": "not ready" }))).into_response(),
    }
}

async fn rebuild(State(state): State<Arc<AppState>>) -> Response {
    match state.rebuild().await {
        Ok(number) => Json(json!({ "generation": number })).into_response(),
        Err(RebuildError::Busy) => ApiError(StatusCode::CONFLICT, RebuildError::Busy.to_string()).into_response(),
        Err(RebuildError::Failed(e)) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({ "error": e.to_string(), "generation": state.slot.generation() })),
        )
            .into_response(),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/recommend/{id}", get(recommend_one))
        .route("/recommend", get(recommend_path))
        .route("/stats", get(stats))
        .route("/healthz", get(healthz))
        .route("/rebuild", post(rebuild))
        .with_state(state)
}

/// Builds the first generation: a fresh rebuild, or the fallback edge list
/// if that fails.
pub async fn initial_build(state: &Arc<AppState>, fallback: Option<PathBuf>) {
    match state.rebuild().await {
        Ok(n) => tracing::info!(generation = n, "initial build complete"),
        Err(e) => {
            tracing::error!(error = %e, "initial build failed");
            let Some(path) = fallback.filter(|p| p.exists()) else {
                return;
            };
            let slot = Arc::clone(&state.slot);
            let loaded = tokio::task::spawn_blocking(move || {
                let g = load_graph(&path)?;
                slot.install(g.snapshot, g.keys)
                    .map_err(|e| Error::Service(e.to_string()))
            })
            .await;
            match loaded {
                Ok(Ok(n)) => tracing::info!(generation = n, "serving fallback edge list"),
                Ok(Err(e)) => tracing::error!(error = %e, "fallback edge list unusable"),
                Err(e) => tracing::error!(error = %e, "fallback load panicked"),
            }
        }
    }
}

/// Rebuilds every `interval`, forever. Failures are logged and the
/// previous generation keeps serving.
pub async fn schedule_rebuilds(state: Arc<AppState>, interval: Duration) {
    let mut ticker = tokio::time::interval_at(tokio::time::Instant::now() + interval, interval);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        ticker.tick().await;
        match state.rebuild().await {
            Ok(n) => tracing::info!(generation = n, "scheduled rebuild complete"),
            Err(RebuildError::Busy) => tracing::warn!("scheduled rebuild skipped: another rebuild is running"),
            Err(e) => tracing::error!(error = %e, "scheduled rebuild failed; keeping previous generation"),
        }
    }
}

/// Serves on an already bound listener. The initial build runs in the
/// background; until it finishes queries get 503.
pub async fn run(
    listener: TcpListener,
    state: Arc<AppState>,
    interval: Duration,
    fallback: Option<PathBuf>,
) -> Result<()> {
    let init_state = Arc::clone(&state);
    let sched_state = Arc::clone(&state);
    tokio::spawn(async move {
        initial_build(&init_state, fallback).await;
        schedule_rebuilds(sched_state, interval).await;
    });
    axum::serve(listener, router(state))
        .await
        .map_err(|e| Error::Service(e.to_string()))
}

pub async fn serve(config: ServiceConfig) -> Result<()> {
    config.check()?;
    let listener = TcpListener::bind(&config.listen_address)
        .await
        .map_err(|e| Error::Service(format!("cannot bind {}: {e}", config.listen_address)))?;
    tracing::info!(address = %config.listen_address, "listening");
    let state = Arc::new(AppState::from_config(&config));
    run(
        listener,
        state,
        Duration::from_secs(config.rebuild_interval),
        config.edge_list.clone(),
    )
    .await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Ingestor;
    use ars_core::KernelClass;

    fn tiny() -> Result<BuildOutput> {
        let mut ing = Ingestor::new(&[KernelClass::unnamed(1)])?;
        ing.push(ars_core::ClassId(1), crate::ingest::RawEvent::new("a", "x"))?;
        Ok(ing.finish())
    }

    #[test]
    fn generations_increase_and_failures_keep_old() {
        let slot = SnapshotSlot::new();
        assert_eq!(slot.generation(), 0);
        assert_eq!(slot.trigger_rebuild(tiny).unwrap(), 1);
        assert_eq!(slot.trigger_rebuild(tiny).unwrap(), 2);
        let err = slot.trigger_rebuild(|| Err(Error::Config("boom".into()))).unwrap_err();
        assert!(matches!(err, RebuildError::Failed(_)));
        assert_eq!(slot.generation(), 2);
        let last = slot.last_outcome().unwrap();
        assert!(!last.ok);
        assert!(last.error.unwrap().contains("boom"));
    }

    #[test]
    fn nested_trigger_is_busy() {
        let slot = SnapshotSlot::new();
        let inner = slot.trigger_rebuild(|| {
            assert!(matches!(slot.trigger_rebuild(tiny), Err(RebuildError::Busy)));
            tiny()
        });
        assert_eq!(inner.unwrap(), 1);
        // the busy flag is released afterwards
        assert_eq!(slot.trigger_rebuild(tiny).unwrap(), 2);
    }
}
