//! HTTP session API for taking trials live.

use std::collections::HashMap;
use std::fs;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use iwisdm::dataset::{load_dataset, Dataset};
use iwisdm::render::frame_file_name;
use iwisdm::stimulus::{builtin_catalog, AttributeSpace};
use iwisdm::trial::FrameRole;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::session::{Session, SessionError};
use crate::CliError;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn unknown_session(id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let status = match e {
            SessionError::MissingTrial(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::CONFLICT,
        };
        ApiError::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct AppState {
    datasets_root: PathBuf,
    sessions_dir: PathBuf,
    space: AttributeSpace,
    datasets: Mutex<HashMap<String, Arc<Dataset>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    /// Serves datasets found under `datasets_root`; sessions already stored
    /// under `run_dir` are resumed.
    pub fn open(datasets_root: &Path, run_dir: &Path) -> Result<AppState, CliError> {
        let sessions_dir = run_dir.join("sessions");
        fs::create_dir_all(&sessions_dir).map_err(|source| CliError::Io {
            path: sessions_dir.clone(),
            source,
        })?;
        let mut sessions = HashMap::new();
        let entries = fs::read_dir(&sessions_dir).map_err(|source| CliError::Io {
            path: sessions_dir.clone(),
            source,
        })?;
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "json") {
                let text = fs::read_to_string(&path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                let session: Session =
                    serde_json::from_str(&text).map_err(|e| CliError::Session(format!("{}: {e}", path.display())))?;
                sessions.insert(session.session_id.clone(), Arc::new(Mutex::new(session)));
            }
        }
        Ok(AppState {
            datasets_root: datasets_root.to_path_buf(),
            sessions_dir,
            space: builtin_catalog().space().clone(),
            datasets: Mutex::new(HashMap::new()),
            sessions: RwLock::new(sessions),
        })
    }

    async fn dataset(self: &Arc<Self>, name: &str) -> ApiResult<Arc<Dataset>> {
        if !is_plain_name(name) {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                format!("invalid dataset name {name:?}"),
            ));
        }
        if let Some(d) = self.datasets.lock().expect("dataset cache lock").get(name) {
            return Ok(d.clone());
        }
        let dir = self.datasets_root.join(name);
        if !dir.join("dataset.json").is_file() {
            return Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown dataset {name}")));
        }
        let space = self.space.clone();
        let loaded = tokio::task::spawn_blocking(move || load_dataset(&dir, &space))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        let loaded = Arc::new(loaded);
        self.datasets
            .lock()
            .expect("dataset cache lock")
            .entry(name.to_string())
            .or_insert(loaded.clone());
        Ok(loaded)
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))
    }

    fn persist(&self, session: &Session) -> ApiResult<()> {
        let path = self.sessions_dir.join(format!("{}.json", session.session_id));
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(session).expect("sessions serialize");
        fs::write(&tmp, text)
            .and_then(|_| fs::rename(&tmp, &path))
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("cannot store session: {e}")))
    }
}

fn is_plain_name(name: &str) -> bool {
    let mut parts = Path::new(name).components();
    matches!((parts.next(), parts.next()), (Some(Component::Normal(_)), None))
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/datasets", get(list_datasets))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/next", get(next_trial))
        .route("/api/session/{id}/answer", post(answer))
        .route("/api/session/{id}/export.csv", get(export))
        .route("/frames/{dataset}/{*path}", get(frame))
        .with_state(state)
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<String>>> {
    let mut names: Vec<String> = fs::read_dir(&state.datasets_root)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .flatten()
        .filter(|e| e.path().join("dataset.json").is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    Ok(Json(names))
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub subject_id: String,
    pub dataset: String,
    /// Shuffles the dataset order when given.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub limit: Option<usize>,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Json(body): Json<CreateSession>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let dataset = state.dataset(&body.dataset).await?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::new(
        id.clone(),
        body.subject_id,
        &body.dataset,
        &dataset,
        body.seed,
        body.limit,
    );
    state.persist(&session)?;
    let total = session.total();
    state
        .sessions
        .write()
        .expect("session table lock")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id, "total": total }))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameView {
    pub index: usize,
    pub role: String,
    /// Absent when the dataset was written without images.
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialView {
    pub done: bool,
    pub trial_id: String,
    pub position: usize,
    pub total: usize,
    pub instruction: String,
    pub frames: Vec<FrameView>,
    pub answer_options: Vec<String>,
}

async fn next_trial(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<serde_json::Value>> {
    let session = state.session(&id)?;
    let name = session.lock().expect("session lock").dataset.clone();
    let dataset = state.dataset(&name).await?;
    let mut s = session.lock().expect("session lock");
    let (position, total) = (s.cursor, s.total());
    let Some(trial_id) = s.serve(now_ms()).map(str::to_string) else {
        return Ok(Json(
            json!({ "done": true, "answered": s.records.len(), "total": total }),
        ));
    };
    state.persist(&s)?;
    drop(s);
    let trial = dataset
        .trial(&trial_id)
        .ok_or_else(|| ApiError::from(SessionError::MissingTrial(trial_id.clone())))?;
    let dir = dataset
        .manifest
        .trials
        .iter()
        .find(|e| e.trial_id == trial_id)
        .map(|e| e.path.clone())
        .unwrap_or_default();
    let frames = trial
        .schedule
        .roles
        .iter()
        .enumerate()
        .map(|(index, role)| {
            let file = format!("{dir}/frames/{}", frame_file_name(index));
            FrameView {
                index,
                role: match role {
                    FrameRole::Object(_) => "object".into(),
                    FrameRole::Delay => "delay".into(),
                },
                url: state
                    .datasets_root
                    .join(&name)
                    .join(&file)
                    .is_file()
                    .then(|| format!("/frames/{name}/{file}")),
            }
        })
        .collect();
    let view = TrialView {
        done: false,
        trial_id,
        position,
        total,
        instruction: trial.instruction.clone(),
        frames,
        answer_options: trial.answer_pool.iter().map(ToString::to_string).collect(),
    };
    Ok(Json(serde_json::to_value(view).expect("views serialize")))
}

#[derive(Debug, Deserialize)]
pub struct AnswerBody {
    pub answer: String,
    #[serde(default)]
    pub client_elapsed_ms: Option<f64>,
    /// Guards against answering a trial other than the one served.
    #[serde(default)]
    pub trial_id: Option<String>,
}

async fn answer(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<AnswerBody>,
) -> ApiResult<Json<serde_json::Value>> {
    let received = now_ms();
    let session = state.session(&id)?;
    let name = session.lock().expect("session lock").dataset.clone();
    let dataset = state.dataset(&name).await?;
    let mut s = session.lock().expect("session lock");
    s.answer(
        &dataset,
        &body.answer,
        body.trial_id.as_deref(),
        body.client_elapsed_ms,
        received,
    )?;
    state.persist(&s)?;
    Ok(Json(json!({
        "recorded": true,
        "answered": s.cursor,
        "remaining": s.total() - s.cursor,
    })))
}

async fn export(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let session = state.session(&id)?;
    let csv = session.lock().expect("session lock").export_csv();
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
}

async fn frame(
    State(state): State<Arc<AppState>>,
    UrlPath((dataset, path)): UrlPath<(String, String)>,
) -> ApiResult<Response> {
    let relative = Path::new(&path);
    let safe = is_plain_name(&dataset)
        && relative.components().all(|c| matches!(c, Component::Normal(_)))
        && relative.extension().is_some_and(|e| e == "png");
    if !safe {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "no such frame"));
    }
    let bytes = tokio::fs::read(state.datasets_root.join(&dataset).join(relative))
        .await
        .map_err(|_| ApiError::new(StatusCode::NOT_FOUND, "no such frame"))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_names_are_single_components() {
        assert!(is_plain_name("low"));
        assert!(!is_plain_name("../low"));
        assert!(!is_plain_name("a/b"));
        assert!(!is_plain_name("/etc"));
        assert!(!is_plain_name(""));
    }
}
