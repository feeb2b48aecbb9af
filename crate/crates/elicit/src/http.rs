use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::manager::SessionManager;
use crate::session::{ChoiceResult, History, Presentation, SessionConfig};

type Shared = Arc<SessionManager>;

#[derive(Debug, Serialize)]
struct Created {
    id: String,
}

#[derive(Debug, Deserialize)]
struct OptionsQuery {
    #[serde(default)]
    front_only: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChoiceBody {
    index: usize,
    /// Episode this choice answers; makes retries idempotent.
    #[serde(default)]
    episode: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdvanceBody {
    #[serde(default)]
    steps: Option<u64>,
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload.map(|Json(v)| v).map_err(|e| ServiceError::BadRequest(e.body_text()))
}

async fn create(
    State(m): State<Shared>,
    payload: Result<Json<SessionConfig>, JsonRejection>,
) -> Result<Json<Created>, ServiceError> {
    let config = body(payload)?;
    Ok(Json(Created { id: m.create(config)? }))
}

async fn options(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<OptionsQuery>,
) -> Result<Json<Presentation>, ServiceError> {
    Ok(Json(m.next_options(&id, q.front_only)?))
}

async fn choice(
    State(m): State<Shared>,
    Path(id): Path<String>,
    payload: Result<Json<ChoiceBody>, JsonRejection>,
) -> Result<Json<ChoiceResult>, ServiceError> {
    let b = body(payload)?;
    Ok(Json(m.submit_choice(&id, b.index, b.episode)?))
}

async fn advance(
    State(m): State<Shared>,
    Path(id): Path<String>,
    payload: Option<Json<AdvanceBody>>,
) -> Result<Json<Vec<ChoiceResult>>, ServiceError> {
    let steps = payload.and_then(|Json(b)| b.steps).unwrap_or(1);
    Ok(Json(m.advance(&id, steps)?))
}

async fn history(State(m): State<Shared>, Path(id): Path<String>) -> Result<Json<History>, ServiceError> {
    Ok(Json(m.history(&id)?))
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create))
        .route("/sessions/{id}/options", get(options))
        .route("/sessions/{id}/choice", post(choice))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/history", get(history))
        .with_state(manager)
}
