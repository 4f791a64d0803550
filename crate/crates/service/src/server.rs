//! HTTP API.
//!
//! | method | path                     | body / result                         |
//! |--------|--------------------------|---------------------------------------|
//! | GET    | `/healthz`               | `ok`                                  |
//! | POST   | `/sessions`              | `{scene?, baseline?, backend?}` → id  |
//! | GET    | `/sessions/{id}/scene`   | scene snapshot                        |
//! | POST   | `/sessions/{id}/command` | `{text, corrupt?}` → pipeline trace   |
//! | GET    | `/sessions/{id}/metrics` | ledger rows                           |
//! | GET    | `/sessions/{id}/events`  | server-sent events                    |
//!
//! Commands on one session run one at a time; sessions are independent.

use crate::config::{BackendKind, ServiceConfig, SetupError};
use crate::session::{LedgerEntry, SceneSnapshot, Session};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use thiserror::Error;
use tokio::sync::{broadcast, Mutex, RwLock};
use v2a_core::metrics::BaselineConfig;
use v2a_core::pipeline::{Interpreter, PipelineTrace};
use v2a_core::scene::{SceneDocument, SceneState};

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateSession {
    pub scene: Option<SceneDocument>,
    pub baseline: Option<String>,
    pub backend: Option<BackendKind>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: String,
    pub baseline: String,
    pub backend: BackendKind,
}

#[derive(Debug, Deserialize)]
pub struct CommandRequest {
    pub text: String,
    #[serde(default)]
    pub corrupt: bool,
}

/// Shared service state.
pub struct AppState {
    config: ServiceConfig,
    /// The mock interpreter is built once; remote ones per session.
    mock: Arc<Interpreter>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, SetupError> {
        config.validate()?;
        let mock = Arc::new(config.interpreter(BackendKind::Mock)?);
        Ok(Self {
            config,
            mock,
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        })
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/scene", get(get_scene))
        .route("/sessions/{id}/command", post(run_command))
        .route("/sessions/{id}/metrics", get(get_metrics))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Option<Json<CreateSession>>,
) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let scene = match req.scene {
        Some(doc) => SceneState::from_document(doc).map_err(|e| ApiError::BadRequest(e.to_string()))?,
        None => state.config.load_scene().map_err(|e| ApiError::Internal(e.to_string()))?,
    };
    let baseline_name = req.baseline.unwrap_or_else(|| state.config.baseline.clone());
    let baseline = BaselineConfig::by_name(&baseline_name).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let backend = req.backend.unwrap_or(state.config.backend);
    let interpreter = match backend {
        BackendKind::Mock => state.mock.clone(),
        BackendKind::Remote => {
            let config = state.config.clone();
            let built = tokio::task::spawn_blocking(move || config.interpreter(BackendKind::Remote))
                .await
                .map_err(|e| ApiError::Internal(e.to_string()))?;
            Arc::new(built.map_err(|e| ApiError::BadRequest(e.to_string()))?)
        }
    };
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed));
    let session = Session::new(id.clone(), scene, baseline.clone(), interpreter);
    state.sessions.write().await.insert(id.clone(), Arc::new(Mutex::new(session)));
    tracing::info!(%id, baseline = %baseline.name, ?backend, "session created");
    Ok((
        StatusCode::CREATED,
        Json(SessionCreated {
            id,
            baseline: baseline.name,
            backend,
        }),
    ))
}

async fn get_scene(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SceneSnapshot>, ApiError> {
    let session = state.session(&id).await?;
    let snapshot = session.lock().await.snapshot();
    Ok(Json(snapshot))
}

async fn run_command(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<CommandRequest>,
) -> Result<Json<PipelineTrace>, ApiError> {
    if req.text.trim().is_empty() {
        return Err(ApiError::BadRequest("empty command text".into()));
    }
    let session = state.session(&id).await?;
    // the lock is held across the blocking run: one writer per scene
    let mut guard = session.lock_owned().await;
    let trace = tokio::task::spawn_blocking(move || guard.run_command(&req.text, req.corrupt))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(trace))
}

async fn get_metrics(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Vec<LedgerEntry>>, ApiError> {
    let session = state.session(&id).await?;
    let rows = session.lock().await.ledgers().to_vec();
    Ok(Json(rows))
}

async fn events(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let session = state.session(&id).await?;
    let rx = session.lock().await.subscribe();
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(ev) => {
                    let kind = match &ev {
                        crate::session::SessionEvent::Pipeline { .. } => "pipeline",
                        crate::session::SessionEvent::SceneDelta { .. } => "scene_delta",
                    };
                    let event = Event::default()
                        .event(kind)
                        .json_data(&ev)
                        .expect("session events serialize");
                    return Some((Ok(event), rx));
                }
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tracing::warn!(skipped = n, "event subscriber lagged");
                }
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

/// Binds `config.listen` and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let listen = config.listen.clone();
    let state = Arc::new(tokio::task::spawn_blocking(move || AppState::new(config)).await??);
    let listener = tokio::net::TcpListener::bind(&listen)
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind {listen}: {e}"))?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await?;
    Ok(())
}
