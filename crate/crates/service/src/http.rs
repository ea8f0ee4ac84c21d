//! JSON over HTTP, versioned under `/v1`.

use std::future::Future;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;

use qmoves_core::control::{
    move_point, resample, smooth, stretch_time, ControlPath, LockMask, PathOrigin,
};
use qmoves_core::level::{serialize_level, stage_of, SkillTag, Stage};
use qmoves_core::quantum::ControlSample;

use crate::model::Origin;
use crate::{GameService, ServiceError};

pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_REPLAY_STRIDE: usize = 100;

type Shared = Arc<GameService>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self {
            ServiceError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            ServiceError::NotFound { .. } => (StatusCode::NOT_FOUND, "not_found"),
            ServiceError::Locked { .. } => (StatusCode::FORBIDDEN, "locked"),
            ServiceError::Invalid(_) | ServiceError::Level(_) | ServiceError::Path(_) => {
                (StatusCode::BAD_REQUEST, "invalid")
            }
            ServiceError::Io(_) | ServiceError::Corrupt { .. } => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        let mut body = json!({ "error": self.to_string(), "kind": kind });
        if let ServiceError::Locked { missing, .. } = &self {
            body["missing"] = json!(missing);
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

#[derive(Debug, Serialize)]
struct LevelSummary {
    id: String,
    title: String,
    stage: Option<Stage>,
    skill_tags: Vec<SkillTag>,
    duration_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    unlocked: Option<bool>,
}

#[derive(Debug, Deserialize)]
struct LevelsQuery {
    user: Option<String>,
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn list_levels(
    State(svc): State<Shared>,
    Query(q): Query<LevelsQuery>,
) -> ApiResult<Vec<LevelSummary>> {
    let unlocked = match &q.user {
        Some(u) => Some(svc.user(u)?.unlocked),
        None => None,
    };
    let mut out = Vec::new();
    for id in svc.level_ids() {
        let level = svc.level(&id)?;
        out.push(LevelSummary {
            title: level.title.clone(),
            stage: stage_of(&id),
            skill_tags: level.skill_tags.clone(),
            duration_max: level.duration_max,
            unlocked: unlocked.as_ref().map(|u| u.contains(&id)),
            id,
        });
    }
    Ok(Json(out))
}

async fn get_level(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> ApiResult<serde_json::Value> {
    let level = svc.level(&id)?;
    Ok(Json(json!({
        "id": level.id,
        "title": level.title,
        "stage": stage_of(&id),
        "level": level,
        "text": serialize_level(level),
    })))
}

#[derive(Debug, Deserialize)]
struct NewUser {
    name: String,
    #[serde(default)]
    origin: Option<Origin>,
}

async fn create_user(
    State(svc): State<Shared>,
    Json(body): Json<NewUser>,
) -> Result<Response, ServiceError> {
    let profile = svc.register_user(&body.name, body.origin.unwrap_or(Origin::Unknown))?;
    Ok((StatusCode::CREATED, Json(profile)).into_response())
}

async fn get_user(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> ApiResult<crate::UserProfile> {
    Ok(Json(svc.user(&id)?))
}

/// A play as the client sends it: who, where, and the raw tweezer samples.
#[derive(Debug, Deserialize)]
pub struct PlaySubmission {
    pub user_id: String,
    pub level_id: String,
    #[serde(default)]
    pub client_version: String,
    pub samples: Vec<ControlSample>,
    #[serde(default)]
    pub origin: Option<PathOrigin>,
}

async fn submit_play(
    State(svc): State<Shared>,
    Json(body): Json<PlaySubmission>,
) -> ApiResult<crate::PlayOutcome> {
    let path = ControlPath::new(body.samples, body.origin.unwrap_or(PathOrigin::Human))?;
    let outcome = tokio::task::spawn_blocking(move || {
        svc.submit_play(&body.user_id, &body.level_id, path, &body.client_version)
    })
    .await
    .map_err(|e| ServiceError::Invalid(format!("scoring task failed: {e}")))??;
    Ok(Json(outcome))
}

#[derive(Debug, Deserialize)]
struct PreviewRequest {
    level_id: String,
    samples: Vec<ControlSample>,
    stride: Option<usize>,
}

async fn preview(
    State(svc): State<Shared>,
    Json(body): Json<PreviewRequest>,
) -> ApiResult<crate::Replay> {
    let path = ControlPath::new(body.samples, PathOrigin::Human)?;
    let stride = body.stride.unwrap_or(DEFAULT_REPLAY_STRIDE);
    let r = tokio::task::spawn_blocking(move || svc.preview(&body.level_id, &path, stride))
        .await
        .map_err(|e| ServiceError::Invalid(format!("preview task failed: {e}")))??;
    Ok(Json(r))
}

/// One fine-tune tool applied to a path.
#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum EditOp {
    MovePoint {
        level_id: String,
        index: usize,
        sample: ControlSample,
    },
    Stretch {
        factor: f64,
    },
    Smooth {
        window: usize,
        #[serde(default)]
        locks: Vec<(f64, f64)>,
    },
    Resample {
        rate: f64,
    },
}

#[derive(Debug, Deserialize)]
struct EditRequest {
    samples: Vec<ControlSample>,
    #[serde(flatten)]
    op: EditOp,
}

#[derive(Debug, Serialize)]
struct EditedPath {
    samples: Vec<ControlSample>,
    origin: PathOrigin,
}

async fn edit_path(
    State(svc): State<Shared>,
    Json(body): Json<EditRequest>,
) -> ApiResult<EditedPath> {
    let path = ControlPath::new(body.samples, PathOrigin::Human)?;
    let edited = match body.op {
        EditOp::MovePoint {
            level_id,
            index,
            sample,
        } => move_point(&path, index, sample, &svc.level(&level_id)?.tweezer)?,
        EditOp::Stretch { factor } => stretch_time(&path, factor)?,
        EditOp::Smooth { window, locks } => smooth(&path, window, &LockMask::new(locks)?)?,
        EditOp::Resample { rate } => resample(&path, rate)?,
    }
    .with_origin(PathOrigin::Edited);
    Ok(Json(EditedPath {
        samples: edited.samples().to_vec(),
        origin: PathOrigin::Edited,
    }))
}

async fn get_play(State(svc): State<Shared>, Path(id): Path<u64>) -> ApiResult<crate::StoredPlay> {
    Ok(Json(svc.play(id)?))
}

#[derive(Debug, Deserialize)]
struct ReplayQuery {
    stride: Option<usize>,
}

async fn replay(
    State(svc): State<Shared>,
    Path(id): Path<u64>,
    Query(q): Query<ReplayQuery>,
) -> ApiResult<crate::Replay> {
    let stride = q.stride.unwrap_or(DEFAULT_REPLAY_STRIDE);
    let r = tokio::task::spawn_blocking(move || svc.replay(id, stride))
        .await
        .map_err(|e| ServiceError::Invalid(format!("replay task failed: {e}")))??;
    Ok(Json(r))
}

#[derive(Debug, Deserialize)]
struct BoardQuery {
    around: Option<String>,
    window: Option<usize>,
}

async fn leaderboard(
    State(svc): State<Shared>,
    Path(level): Path<String>,
    Query(q): Query<BoardQuery>,
) -> ApiResult<Vec<crate::LeaderboardEntry>> {
    Ok(Json(svc.leaderboard(
        &level,
        q.around.as_deref(),
        q.window.unwrap_or(DEFAULT_WINDOW),
    )?))
}

async fn metrics(State(svc): State<Shared>) -> Json<crate::Metrics> {
    Json(svc.metrics())
}

pub fn router(service: Shared) -> Router {
    let v1 = Router::new()
        .route("/health", get(health))
        .route("/levels", get(list_levels))
        .route("/levels/:id", get(get_level))
        .route("/users", post(create_user))
        .route("/users/:id", get(get_user))
        .route("/plays", post(submit_play))
        .route("/plays/:id", get(get_play))
        .route("/plays/:id/replay", get(replay))
        .route("/preview", post(preview))
        .route("/paths/edit", post(edit_path))
        .route("/leaderboards/:level", get(leaderboard))
        .route("/metrics", get(metrics));
    Router::new().nest("/v1", v1).with_state(service)
}

/// Serves until `shutdown` resolves, then syncs the event log.
pub async fn serve(
    listener: TcpListener,
    service: Shared,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> crate::Result<()> {
    axum::serve(listener, router(service.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    service.sync()
}
