//! HTTP session service: each session drives one decision-tree run whose
//! queries are answered over REST.

pub mod session;

use std::collections::HashMap;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::Rng;
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};
use tokio::sync::watch;

use qdt_core::engine::Config;
use session::{new_snapshot, run_engine, RemoteSource, SessionState, Snapshot};

pub use session::SessionView;

pub const DEFAULT_PORT: u16 = 8087;
pub const IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("bad overrides: {0}")]
    BadOverrides(String),
    #[error("unknown session `{0}`")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("bad request: {0}")]
    BadRequest(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::BadOverrides(_) | ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

struct Session {
    state: watch::Receiver<Snapshot>,
    answers: mpsc::Sender<(String, String)>,
    submit: tokio::sync::Mutex<()>,
}

pub struct AppState {
    pub config: Config,
    /// Idle time after which a session expires.
    pub idle_timeout: Duration,
    /// How long a request waits for the engine to settle before replying.
    pub settle_timeout: Duration,
    sessions: Mutex<HashMap<String, Arc<Session>>>,
}

impl AppState {
    pub fn new(config: Config) -> Self {
        Self {
            config,
            idle_timeout: IDLE_TIMEOUT,
            settle_timeout: Duration::from_secs(10),
            sessions: Mutex::new(HashMap::new()),
        }
    }

    fn lookup(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let mut sessions = self.sessions.lock().expect("session index lock");
        let session = sessions.get(id).cloned().ok_or_else(|| ApiError::NotFound(id.to_string()))?;
        if session.state.borrow().last_activity.elapsed() > self.idle_timeout {
            sessions.remove(id);
            return Err(ApiError::NotFound(id.to_string()));
        }
        Ok(session)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answer", post(submit_answer))
        .route("/sessions/{id}/result", get(get_result))
        .route("/sessions/{id}/artifacts", get(get_artifacts))
        .with_state(state)
}

fn new_session_id() -> String {
    format!("{:032x}", rand::rngs::OsRng.gen::<u128>())
}

/// Waits until the engine has moved past `after` and is not mid-run.
async fn settle(rx: &mut watch::Receiver<Snapshot>, after: u64, timeout: Duration) -> SessionView {
    let _ = tokio::time::timeout(
        timeout,
        rx.wait_for(|s| s.version > after && s.view.state != SessionState::Running),
    )
    .await;
    let view = rx.borrow().view.clone();
    view
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let overrides: JsonValue = if body.iter().all(u8::is_ascii_whitespace) {
        json!({})
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::BadOverrides(e.to_string()))?
    };
    let config = app.config.merged(&overrides).map_err(|e| ApiError::BadOverrides(e.to_string()))?;
    let id = new_session_id();
    let (publisher, mut rx) = watch::channel(new_snapshot(&id, app.idle_timeout));
    let (answers_tx, answers_rx) = mpsc::channel();
    let remote = RemoteSource {
        answers: answers_rx,
        publisher: Arc::new(publisher),
        idle: app.idle_timeout,
    };
    std::thread::Builder::new()
        .name(format!("session-{}", &id[..8]))
        .spawn(move || run_engine(config, remote))
        .map_err(|e| ApiError::Conflict(format!("cannot start session: {e}")))?;
    app.sessions.lock().expect("session index lock").insert(
        id.clone(),
        Arc::new(Session {
            state: rx.clone(),
            answers: answers_tx,
            submit: tokio::sync::Mutex::new(()),
        }),
    );
    let view = settle(&mut rx, 0, app.settle_timeout).await;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = app.lookup(&id)?;
    let view = session.state.borrow().view.clone();
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
pub struct AnswerBody {
    pub query_id: String,
    pub value: JsonValue,
}

async fn submit_answer(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<AnswerBody>,
) -> Result<Json<SessionView>, ApiError> {
    let session = app.lookup(&id)?;
    let _guard = session.submit.lock().await;
    let raw = match &body.value {
        JsonValue::String(s) => s.clone(),
        JsonValue::Number(n) => n.to_string(),
        JsonValue::Bool(b) => b.to_string(),
        JsonValue::Null => String::new(),
        other => return Err(ApiError::BadRequest(format!("value must be a scalar, got {other}"))),
    };
    let version = {
        let snap = session.state.borrow();
        if snap.view.state != SessionState::AwaitingAnswer {
            return Err(ApiError::Conflict("session is not awaiting an answer".into()));
        }
        let pending = snap.view.pending_query.as_ref().map(|q| q.id.as_str());
        if pending != Some(body.query_id.as_str()) {
            return Err(ApiError::Conflict(format!(
                "pending query is `{}`, not `{}`",
                pending.unwrap_or_default(),
                body.query_id
            )));
        }
        snap.version
    };
    session
        .answers
        .send((body.query_id, raw))
        .map_err(|_| ApiError::Conflict("session engine has stopped".into()))?;
    let mut rx = session.state.clone();
    Ok(Json(settle(&mut rx, version, app.settle_timeout).await))
}

async fn get_result(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = app.lookup(&id)?;
    let snap = session.state.borrow().clone();
    match (snap.view.state, snap.result_json) {
        (SessionState::Finished, Some(text)) => Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response()),
        (state, _) => Err(ApiError::Conflict(format!("session is {state:?}, not finished"))),
    }
}

async fn get_artifacts(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<JsonValue>, ApiError> {
    let session = app.lookup(&id)?;
    let snap = session.state.borrow().clone();
    let Some(run_dir) = snap.run_dir else {
        return Err(ApiError::Conflict("session has no artifacts yet".into()));
    };
    let files: Vec<JsonValue> = snap
        .files
        .iter()
        .map(|f| {
            json!({
                "name": f.file_name().map(|n| n.to_string_lossy().into_owned()),
                "path": f.display().to_string(),
            })
        })
        .collect();
    Ok(Json(json!({
        "run_id": snap.view.run_id,
        "run_dir": run_dir.display().to_string(),
        "files": files,
    })))
}

/// Binds and serves until the process ends.
pub async fn serve(config: Config, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(Arc::new(AppState::new(config)))).await
}
