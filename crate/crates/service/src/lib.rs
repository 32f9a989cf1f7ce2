//! HTTP+JSON service over interactive derivation sessions.
//!
//! Routes:
//!
//! | method | path                    | body                         | reply        |
//! |--------|-------------------------|------------------------------|--------------|
//! | POST   | `/sessions`             | `{premises, conclusion?}`    | `{id, graph}`|
//! | GET    | `/sessions/{id}/graph`  |                              | graph view   |
//! | POST   | `/sessions/{id}/expand` | `{slice, t, v}`              | delta        |
//! | POST   | `/sessions/{id}/auto`   | `{budget?}` or empty         | delta        |
//! | GET    | `/sessions/{id}/trace`  |                              | trace        |
//! | GET    | `/sessions/{id}/render` |                              | DOT text     |
//!
//! Errors are `{code, message, locus?}` with status 400 (bad input), 404
//! (unknown session or slice) or 409 (illegal choice, terminal session).
//!
//! Mutations of one session are serialized by a per-session lock and run
//! on the blocking pool; reads are served from a snapshot taken after the
//! last mutation, so they never wait for a running search.

pub mod journal;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use grefute_core::json::SliceJson;
use grefute_core::prover::{Budget, Trace};
use grefute_core::session::{Delta, GraphView, Problem, Session, SessionError};
use grefute_core::{Exec, Name};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use journal::Journal;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locus: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> ApiError {
        ApiError { status: status.as_u16(), code: code.into(), message: message.into(), locus: None }
    }

    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn unknown_session(id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"))
    }

    fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let status = match e {
            SessionError::Parse { .. } => StatusCode::BAD_REQUEST,
            SessionError::UnknownSlice(_) => StatusCode::NOT_FOUND,
            SessionError::Illegal(_) | SessionError::Terminal(_) => StatusCode::CONFLICT,
            SessionError::Prover(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError { status: status.as_u16(), code: e.code().into(), message: e.to_string(), locus: e.locus() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub graph: GraphView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpandRequest {
    pub slice: u64,
    pub t: SliceJson,
    pub v: Vec<Name>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AutoRequest {
    #[serde(default)]
    pub budget: Budget,
}

/// What reads are served from.
struct Snapshot {
    graph: GraphView,
    trace: Trace,
    dot: String,
}

impl Snapshot {
    fn of(s: &Session) -> Snapshot {
        Snapshot { graph: s.graph_view(), trace: s.trace(), dot: s.render() }
    }
}

struct Slot {
    session: Arc<Mutex<Session>>,
    snapshot: RwLock<Arc<Snapshot>>,
}

impl Slot {
    fn new(s: Session) -> Slot {
        let snapshot = RwLock::new(Arc::new(Snapshot::of(&s)));
        Slot { session: Arc::new(Mutex::new(s)), snapshot }
    }

    fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }
}

/// Shared service state.
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
    next_id: AtomicU64,
    journal: Option<Journal>,
    exec: Exec,
}

impl AppState {
    pub fn in_memory() -> AppState {
        AppState { sessions: RwLock::default(), next_id: AtomicU64::new(1), journal: None, exec: Exec::default() }
    }

    /// State backed by a journal directory; existing journals are replayed.
    pub fn with_journal(dir: PathBuf) -> Result<AppState, journal::JournalError> {
        let journal = Journal::open(dir)?;
        let mut sessions = HashMap::new();
        let mut max = 0;
        for (id, session) in journal.load_all(Exec::default())? {
            max = max.max(id.parse::<u64>().unwrap_or(0));
            sessions.insert(id, Arc::new(Slot::new(session)));
        }
        Ok(AppState { sessions: RwLock::new(sessions), next_id: AtomicU64::new(max + 1), journal: Some(journal), exec: Exec::default() })
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions.read().expect("session table").get(id).cloned().ok_or_else(|| ApiError::unknown_session(id))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("session table").keys().cloned().collect();
        ids.sort_by_key(|id| id.parse::<u64>().unwrap_or(u64::MAX));
        ids
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn create(State(state): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<Created>), ApiError> {
    let problem: Problem = parse_body(&body)?;
    let exec = state.exec;
    let p = problem.clone();
    let session = tokio::task::spawn_blocking(move || Session::create(p, exec))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    let id = state.next_id.fetch_add(1, Ordering::SeqCst).to_string();
    if let Some(j) = &state.journal {
        j.create(&id, &problem).map_err(|e| ApiError::internal(e.to_string()))?;
    }
    let slot = Arc::new(Slot::new(session));
    let graph = slot.snapshot().graph.clone();
    state.sessions.write().expect("session table").insert(id.clone(), slot);
    tracing::info!(session = %id, status = ?graph.status, "created");
    Ok((StatusCode::CREATED, Json(Created { id, graph })))
}

async fn graph(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<GraphView>, ApiError> {
    Ok(Json(state.slot(&id)?.snapshot().graph.clone()))
}

async fn trace(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Trace>, ApiError> {
    Ok(Json(state.slot(&id)?.snapshot().trace.clone()))
}

async fn render(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let dot = state.slot(&id)?.snapshot().dot.clone();
    Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz; charset=utf-8")], dot).into_response())
}

/// Runs `f` on the session under its lock, off the async workers, then
/// journals the delta and refreshes the snapshot.
async fn mutate<F>(state: &AppState, id: &str, f: F) -> Result<Json<Delta>, ApiError>
where
    F: FnOnce(&mut Session) -> Result<Delta, SessionError> + Send + 'static,
{
    let slot = state.slot(id)?;
    let guard = slot.session.clone().lock_owned().await;
    let (guard, result) = tokio::task::spawn_blocking(move || {
        let mut guard = guard;
        let result = f(&mut guard);
        (guard, result)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?;
    let delta = result?;
    if let Some(j) = &state.journal {
        j.append(id, &delta).map_err(|e| ApiError::internal(e.to_string()))?;
    }
    *slot.snapshot.write().expect("snapshot lock") = Arc::new(Snapshot::of(&guard));
    tracing::info!(session = %id, status = ?delta.status, version = delta.version, "mutated");
    Ok(Json(delta))
}

async fn expand(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Json<Delta>, ApiError> {
    let req: ExpandRequest = parse_body(&body)?;
    mutate(&state, &id, move |s| s.expand(req.slice, &req.t, &req.v)).await
}

async fn auto(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Json<Delta>, ApiError> {
    let req: AutoRequest = if body.iter().all(u8::is_ascii_whitespace) { AutoRequest::default() } else { parse_body(&body)? };
    mutate(&state, &id, move |s| s.auto(&req.budget)).await
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/graph", get(graph))
        .route("/sessions/{id}/expand", post(expand))
        .route("/sessions/{id}/auto", post(auto))
        .route("/sessions/{id}/trace", get(trace))
        .route("/sessions/{id}/render", get(render))
        .with_state(state)
}

/// Listen address and journal directory, from `GREFUTE_ADDR` and
/// `GREFUTE_JOURNAL_DIR`.
#[derive(Debug, Clone)]
pub struct Config {
    pub addr: SocketAddr,
    pub journal_dir: Option<PathBuf>,
}

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

impl Config {
    pub fn from_env() -> Result<Config, String> {
        let addr = std::env::var("GREFUTE_ADDR").unwrap_or_else(|_| DEFAULT_ADDR.to_string());
        let addr = addr.parse().map_err(|e| format!("GREFUTE_ADDR `{addr}`: {e}"))?;
        let journal_dir = std::env::var_os("GREFUTE_JOURNAL_DIR").filter(|d| !d.is_empty()).map(PathBuf::from);
        Ok(Config { addr, journal_dir })
    }
}

pub async fn serve(config: Config) -> std::io::Result<()> {
    let state = match &config.journal_dir {
        Some(dir) => AppState::with_journal(dir.clone()).map_err(std::io::Error::other)?,
        None => AppState::in_memory(),
    };
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(state))).await
}
