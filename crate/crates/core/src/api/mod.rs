//! HTTP/JSON surface over a shared [`Engine`].
//!
//! Every handler takes the engine lock for its whole body, and the tick
//! loop holds the same lock for a whole tick, so mutations land between
//! ticks.

mod config;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::aca::{parse_rule_file, Aca};
use crate::monitor::{Engine, EngineError, TickReport, TriggerLogEntry};
use crate::policy::{serialize_query, Diagnostic, Policy};
use crate::rdf::PrefixMap;
use crate::sim::{SimError, WorldEvent, WorldSnapshot};

pub use config::{ApiConfig, ConfigError};

#[derive(Clone)]
pub struct AppState {
    engine: Arc<Mutex<Engine>>,
    running: Arc<AtomicBool>,
    tick_period: Duration,
}

impl AppState {
    pub fn new(engine: Engine, tick_period: Duration) -> Self {
        AppState {
            engine: Arc::new(Mutex::new(engine)),
            running: Arc::new(AtomicBool::new(false)),
            tick_period,
        }
    }

    pub fn engine(&self) -> MutexGuard<'_, Engine> {
        self.engine.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn is_running(&self) -> bool {
        self.running.load(Ordering::SeqCst)
    }

    pub fn set_running(&self, running: bool) {
        self.running.store(running, Ordering::SeqCst);
    }

    pub fn tick_period(&self) -> Duration {
        self.tick_period
    }

    /// Tick every period while running. Runs until the task is dropped.
    pub async fn tick_loop(self) {
        let mut interval = tokio::time::interval(self.tick_period);
        interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            interval.tick().await;
            if self.is_running() {
                let report = self.engine().tick();
                for fault in &report.faults {
                    tracing::warn!(tick = fault.tick, policy = ?fault.policy, "{}", fault.message);
                }
            }
        }
    }
}

/// Error body: a message plus optional machine-readable diagnostics.
#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    diagnostics: Vec<Diagnostic>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: message.into(),
                diagnostics: Vec::new(),
            },
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let message = e.to_string();
        match e {
            EngineError::Policy { error, .. } => ApiError {
                status: StatusCode::BAD_REQUEST,
                body: ErrorBody {
                    error: message,
                    diagnostics: error.0,
                },
            },
            EngineError::UnknownPolicy(_)
            | EngineError::Sim(SimError::UnknownTunnel(_) | SimError::UnknownWorker(_)) => ApiError::not_found(message),
            _ => ApiError::bad_request(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// JSON body extraction that reports malformed input as our 400 shape.
struct Body<T>(T);

impl<S, T> axum::extract::FromRequest<S> for Body<T>
where
    T: serde::de::DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(rejection) => Err(ApiError::bad_request(rejection.body_text())),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/acas", get(search_acas))
        .route("/rules", post(post_rules))
        .route("/policies", get(list_policies).post(create_policy))
        .route(
            "/policies/{id}",
            get(get_policy).put(update_policy).delete(delete_policy),
        )
        .route("/policies/{id}/query", get(policy_query))
        .route("/sim/reset", post(sim_reset))
        .route("/sim/step", post(sim_step))
        .route("/sim/run", post(sim_run))
        .route("/sim/pause", post(sim_pause))
        .route("/sim/events", post(sim_event))
        .route("/sim/state", get(sim_state))
        .route("/log", get(get_log))
        .with_state(state)
}

/// [`router`] plus static UI assets.
pub fn app(state: AppState, static_dir: Option<&std::path::Path>) -> Router {
    let api = router(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

/// Bind and serve until interrupted.
pub async fn serve(config: ApiConfig) -> anyhow::Result<()> {
    let engine = config.build_engine()?;
    let state = AppState::new(engine, Duration::from_millis(config.tick_period_ms));
    state.set_running(config.autorun);
    tokio::spawn(state.clone().tick_loop());
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app(state, config.static_dir.as_deref()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
}

async fn search_acas(State(state): State<AppState>, Query(params): Query<SearchParams>) -> Json<Vec<Aca>> {
    let engine = state.engine();
    Json(engine.catalog().search(&params.q).into_iter().cloned().collect())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RulesSummary {
    rules: usize,
    applicable_rules: usize,
    acas: usize,
}

async fn post_rules(
    State(state): State<AppState>,
    Body(doc): Body<serde_json::Value>,
) -> ApiResult<Json<RulesSummary>> {
    let mut engine = state.engine();
    let prefixes = PrefixMap::with_defaults(engine.world().base());
    let rules = parse_rule_file(&doc.to_string(), &prefixes).map_err(|e| ApiError::bad_request(e.to_string()))?;
    engine.set_rules(rules)?;
    let catalog = engine.catalog();
    Ok(Json(RulesSummary {
        rules: catalog.rule_count(),
        applicable_rules: catalog.applicable_rules(),
        acas: catalog.acas().len(),
    }))
}

#[derive(Serialize)]
struct PolicyView {
    policy: Policy,
    query: String,
}

fn policy_view(engine: &Engine, id: &str) -> ApiResult<PolicyView> {
    let policy = engine
        .policy(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown policy {id}")))?;
    let query = engine.compiled(id).expect("installed with its query");
    Ok(PolicyView {
        policy: policy.clone(),
        query: serialize_query(query),
    })
}

async fn list_policies(State(state): State<AppState>) -> Json<Vec<Policy>> {
    Json(state.engine().policies().cloned().collect())
}

async fn get_policy(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<PolicyView>> {
    Ok(Json(policy_view(&state.engine(), &id)?))
}

async fn create_policy(
    State(state): State<AppState>,
    Body(policy): Body<Policy>,
) -> ApiResult<(StatusCode, Json<PolicyView>)> {
    let mut engine = state.engine();
    if engine.policy(&policy.id).is_some() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("policy {} already exists", policy.id),
        ));
    }
    let id = policy.id.clone();
    engine.upsert_policy(policy)?;
    Ok((StatusCode::CREATED, Json(policy_view(&engine, &id)?)))
}

async fn update_policy(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(mut policy): Body<Policy>,
) -> ApiResult<Json<PolicyView>> {
    let mut engine = state.engine();
    if engine.policy(&id).is_none() {
        return Err(ApiError::not_found(format!("unknown policy {id}")));
    }
    if policy.id.is_empty() {
        policy.id = id.clone();
    }
    if policy.id != id {
        return Err(ApiError::bad_request(format!(
            "body id {} does not match path id {id}",
            policy.id
        )));
    }
    engine.upsert_policy(policy)?;
    Ok(Json(policy_view(&engine, &id)?))
}

async fn delete_policy(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.engine().remove_policy(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn policy_query(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let engine = state.engine();
    let query = engine
        .compiled(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown policy {id}")))?;
    Ok((
        [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
        serialize_query(query),
    )
        .into_response())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StateView {
    #[serde(flatten)]
    snapshot: WorldSnapshot,
    running: bool,
    seed: u64,
    tick_period_ms: u64,
}

fn state_view(state: &AppState, engine: &Engine) -> StateView {
    StateView {
        snapshot: engine.world().snapshot(),
        running: state.is_running(),
        seed: engine.seed(),
        tick_period_ms: state.tick_period.as_millis() as u64,
    }
}

#[derive(Deserialize)]
struct ResetParams {
    seed: Option<u64>,
}

async fn sim_reset(State(state): State<AppState>, Query(params): Query<ResetParams>) -> ApiResult<Json<StateView>> {
    let mut engine = state.engine();
    engine.reset(params.seed)?;
    Ok(Json(state_view(&state, &engine)))
}

#[derive(Deserialize)]
struct StepParams {
    n: Option<u64>,
}

/// Upper bound on ticks per `/sim/step` request.
const MAX_STEP: u64 = 100_000;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StepResult {
    tick: u64,
    reports: Vec<TickReport>,
}

async fn sim_step(State(state): State<AppState>, Query(params): Query<StepParams>) -> ApiResult<Json<StepResult>> {
    let n = params.n.unwrap_or(1);
    if n > MAX_STEP {
        return Err(ApiError::bad_request(format!("n must be at most {MAX_STEP}")));
    }
    let mut engine = state.engine();
    let reports = (0..n).map(|_| engine.tick()).collect();
    Ok(Json(StepResult {
        tick: engine.world().tick(),
        reports,
    }))
}

async fn sim_run(State(state): State<AppState>) -> Json<serde_json::Value> {
    state.set_running(true);
    Json(json!({ "running": true }))
}

async fn sim_pause(State(state): State<AppState>) -> Json<serde_json::Value> {
    state.set_running(false);
    Json(json!({ "running": false }))
}

async fn sim_event(
    State(state): State<AppState>,
    Body(event): Body<WorldEvent>,
) -> ApiResult<(StatusCode, Json<StateView>)> {
    let mut engine = state.engine();
    engine.inject_event(event)?;
    Ok((StatusCode::CREATED, Json(state_view(&state, &engine))))
}

async fn sim_state(State(state): State<AppState>) -> Json<StateView> {
    let engine = state.engine();
    Json(state_view(&state, &engine))
}

#[derive(Deserialize)]
struct LogParams {
    #[serde(default)]
    since: u64,
}

async fn get_log(State(state): State<AppState>, Query(params): Query<LogParams>) -> Json<Vec<TriggerLogEntry>> {
    Json(state.engine().log_since(params.since).to_vec())
}
