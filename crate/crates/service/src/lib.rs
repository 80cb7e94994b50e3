//! HTTP front end for reviewing alignment proposals.
//!
//! Each match lives in `DATA/<match_id>/` with a `proposals.json`, the
//! review journal, and optionally `summary.sfeat` / `broadcast.sfeat` for
//! distance curves. Sessions are opened lazily and each sits behind its own
//! lock, so writes to one match are serialized while other matches proceed.

mod error;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::HeaderMap;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use summalign_core::alignment::distance_curve;
use summalign_core::dataset::{annotation_to_json, load_features, Interval};
use summalign_core::review::{
    hint_window, ReviewAction, ReviewSession, SessionStatus, DEFAULT_HINT_TOLERANCE_S, PROPOSALS_FILE,
};
use summalign_core::AlignmentProposal;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tower_http::services::ServeDir;

pub use error::{ApiError, ServeError};

pub const SUMMARY_FEATURES: &str = "summary.sfeat";
pub const BROADCAST_FEATURES: &str = "broadcast.sfeat";
pub const REVIEWER_HEADER: &str = "x-reviewer-id";

const HINT_GUIDANCE: &str = "Most true sources lie within a minute of the proposed window.";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub addr: SocketAddr,
    pub ui_dir: Option<PathBuf>,
}

type Slot = Arc<Mutex<ReviewSession>>;

pub struct AppState {
    data_dir: PathBuf,
    sessions: RwLock<HashMap<String, Slot>>,
}

impl AppState {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        AppState {
            data_dir: data_dir.into(),
            sessions: RwLock::new(HashMap::new()),
        }
    }

    fn match_dir(&self, id: &str) -> Result<PathBuf, ApiError> {
        let valid = !id.is_empty()
            && !id.starts_with('.')
            && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        let dir = self.data_dir.join(id);
        if !valid || !dir.join(PROPOSALS_FILE).is_file() {
            return Err(ApiError::UnknownMatch(id.to_string()));
        }
        Ok(dir)
    }

    /// Returns the cached session, opening it on first use. A session that
    /// fails to open is not cached, so a repaired journal is picked up.
    fn session(&self, id: &str) -> Result<Slot, ApiError> {
        if let Some(s) = self.sessions.read().get(id) {
            return Ok(s.clone());
        }
        let dir = self.match_dir(id)?;
        let mut map = self.sessions.write();
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        let session = ReviewSession::open(&dir).map_err(|source| ApiError::Unavailable {
            id: id.to_string(),
            source,
        })?;
        let slot = Arc::new(Mutex::new(session));
        map.insert(id.to_string(), slot.clone());
        Ok(slot)
    }

    fn match_ids(&self) -> std::io::Result<Vec<String>> {
        let mut ids: Vec<String> = std::fs::read_dir(&self.data_dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().join(PROPOSALS_FILE).is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        ids.sort();
        Ok(ids)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MatchSummary {
    pub match_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<SessionStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProposalView {
    pub index: usize,
    pub version: u64,
    #[serde(flatten)]
    pub proposal: AlignmentProposal,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionView {
    pub match_id: String,
    pub fps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broadcast_frames: Option<usize>,
    pub status: SessionStatus,
    pub journal_len: u64,
    pub proposals: Vec<ProposalView>,
}

fn session_view(s: &ReviewSession) -> SessionView {
    let st = s.state();
    SessionView {
        match_id: st.match_id.clone(),
        fps: st.fps,
        broadcast_frames: st.broadcast_frames,
        status: st.status,
        journal_len: st.applied,
        proposals: st
            .proposals
            .iter()
            .zip(&st.versions)
            .enumerate()
            .map(|(index, (p, &version))| ProposalView {
                index,
                version,
                proposal: p.clone(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrameSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Accept,
    Adjust,
    Reject,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionBody {
    pub action: ActionKind,
    /// Frame bounds on the broadcast timeline; required for `adjust`.
    #[serde(default)]
    pub interval: Option<FrameSpan>,
    pub version: u64,
}

#[derive(Debug, Deserialize)]
pub struct ContextQuery {
    pub tolerance_s: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurvePoint {
    pub frame: usize,
    pub t_s: f64,
    pub distance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ContextView {
    pub index: usize,
    pub tolerance_s: f64,
    pub hint_window: Interval,
    pub guidance: String,
    /// Window-start distances inside the hint window; empty without features.
    pub curve: Vec<CurvePoint>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn reviewer(headers: &HeaderMap) -> String {
    headers
        .get(REVIEWER_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|v| !v.is_empty())
        .unwrap_or("anonymous")
        .to_string()
}

type Shared = Arc<AppState>;

async fn list_matches(State(app): State<Shared>) -> Result<Json<Vec<MatchSummary>>, ApiError> {
    let ids = app
        .match_ids()
        .map_err(|e| ApiError::Core(summalign_core::Error::Io(e)))?;
    let out = ids
        .into_iter()
        .map(|id| match app.session(&id) {
            Ok(slot) => {
                let s = slot.lock();
                let st = s.state();
                MatchSummary {
                    proposals: Some(st.proposals.len()),
                    reviewed: Some(st.proposals.iter().filter(|p| p.status.is_reviewed()).count()),
                    status: Some(st.status),
                    error: None,
                    match_id: id,
                }
            }
            Err(e) => MatchSummary {
                match_id: id,
                proposals: None,
                reviewed: None,
                status: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(Json(out))
}

async fn get_session(State(app): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<SessionView>, ApiError> {
    let slot = app.session(&id)?;
    let view = session_view(&slot.lock());
    Ok(Json(view))
}

async fn post_action(
    State(app): State<Shared>,
    UrlPath((id, index)): UrlPath<(String, usize)>,
    headers: HeaderMap,
    Json(body): Json<ActionBody>,
) -> Result<Json<ProposalView>, ApiError> {
    let slot = app.session(&id)?;
    let mut s = slot.lock();
    let action = match (body.action, body.interval) {
        (ActionKind::Accept, _) => ReviewAction::Accept,
        (ActionKind::Reject, _) => ReviewAction::Reject,
        (ActionKind::Adjust, Some(span)) => ReviewAction::Adjust {
            interval: Interval::new(span.start, span.end, s.state().fps)?,
        },
        (ActionKind::Adjust, None) => return Err(ApiError::BadRequest("adjust needs an interval".into())),
    };
    let proposal = s.act(index, action, body.version, &reviewer(&headers), now_ms())?.clone();
    let version = s.state().versions[index];
    log::info!("{id}/{index}: {:?} -> version {version}", body.action);
    Ok(Json(ProposalView {
        index,
        version,
        proposal,
    }))
}

async fn post_finalize(
    State(app): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> Result<Json<SessionView>, ApiError> {
    let slot = app.session(&id)?;
    let mut s = slot.lock();
    s.finalize(&reviewer(&headers), now_ms())?;
    Ok(Json(session_view(&s)))
}

async fn get_export(State(app): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let slot = app.session(&id)?;
    let annotation = slot.lock().export_ground_truth()?;
    Ok(([(CONTENT_TYPE, "application/json")], annotation_to_json(&annotation)))
}

fn curve_for(dir: &Path, proposal: &AlignmentProposal, window: &Interval) -> Result<Vec<CurvePoint>, ApiError> {
    let (sp, bp) = (dir.join(SUMMARY_FEATURES), dir.join(BROADCAST_FEATURES));
    if !sp.is_file() || !bp.is_file() {
        return Ok(Vec::new());
    }
    let summary = load_features(sp)?;
    let broadcast = load_features(bp)?;
    let fps = broadcast.fps();
    Ok(distance_curve(&summary, &proposal.summary_interval, &broadcast, Some(window))?
        .into_iter()
        .map(|(frame, distance)| CurvePoint {
            frame,
            t_s: frame as f64 / fps,
            distance,
        })
        .collect())
}

async fn get_context(
    State(app): State<Shared>,
    UrlPath((id, index)): UrlPath<(String, usize)>,
    Query(q): Query<ContextQuery>,
) -> Result<Json<ContextView>, ApiError> {
    let slot = app.session(&id)?;
    let (proposal, frames) = {
        let s = slot.lock();
        (s.proposal(index)?.clone(), s.state().broadcast_frames)
    };
    let tolerance_s = q.tolerance_s.unwrap_or(DEFAULT_HINT_TOLERANCE_S);
    let window = hint_window(&proposal, tolerance_s, frames)?;
    let dir = app.match_dir(&id)?;
    let curve = tokio::task::spawn_blocking(move || curve_for(&dir, &proposal, &window))
        .await
        .map_err(|e| ApiError::BadRequest(format!("curve task failed: {e}")))??;
    Ok(Json(ContextView {
        index,
        tolerance_s,
        hint_window: window,
        guidance: HINT_GUIDANCE.to_string(),
        curve,
    }))
}

/// All API routes, plus the static review UI when `ui_dir` is given.
pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/matches", get(list_matches))
        .route("/matches/{id}/session", get(get_session))
        .route("/matches/{id}/proposals/{index}/action", post(post_action))
        .route("/matches/{id}/finalize", post(post_finalize))
        .route("/matches/{id}/export", get(get_export))
        .route("/matches/{id}/proposals/{index}/context", get(get_context))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub struct ServiceHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(mut self) -> Result<(), ServeError> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.wait().await
    }

    /// Runs until the server stops on its own or is shut down.
    pub async fn wait(self) -> Result<(), ServeError> {
        match self.task.await {
            Ok(r) => Ok(r?),
            Err(e) => Err(ServeError::Io(std::io::Error::other(e))),
        }
    }
}

/// Binds the listener and starts serving in the background. Fails up front
/// when the port is taken or the data directory is missing.
pub async fn serve(config: ServiceConfig) -> Result<ServiceHandle, ServeError> {
    if !config.data_dir.is_dir() {
        return Err(ServeError::MissingData(config.data_dir));
    }
    let listener = TcpListener::bind(config.addr).await.map_err(|source| ServeError::Bind {
        addr: config.addr,
        source,
    })?;
    let addr = listener.local_addr()?;
    let app = router(Arc::new(AppState::new(&config.data_dir)), config.ui_dir.as_deref());
    let (tx, rx) = oneshot::channel();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    log::info!("serving {} on http://{addr}", config.data_dir.display());
    Ok(ServiceHandle {
        addr,
        shutdown: Some(tx),
        task,
    })
}
