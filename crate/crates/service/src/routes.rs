use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use prooftutor_core::hints::HintType;
use prooftutor_core::logic::{Formula, RuleId};
use prooftutor_core::proof::{NodeId, StepOutcome};

use crate::error::ApiError;
use crate::view::{session_view, ApiSession, HintView, ProblemView};
use crate::{AppState, Entry};

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/problems", get(problems))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/steps", post(step))
        .route("/sessions/{id}/hint", post(hint))
        .route("/sessions/{id}/nodes/{nid}/delete", post(delete))
        .route("/sessions/{id}/restart", post(restart))
        .route("/sessions/{id}/skip", post(skip))
        .with_state(state)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub student: String,
    #[serde(default)]
    pub condition: Option<HintType>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRequest {
    pub premises: Vec<NodeId>,
    pub rule: String,
    #[serde(default)]
    pub claimed: Option<String>,
}

/// The tutor's answer to a rule selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum StepResult {
    Derived {
        node: NodeId,
        statement: Formula,
        justified_hint: bool,
    },
    NeedsInput {
        options: Option<Vec<Formula>>,
    },
    Redundant {
        existing: NodeId,
    },
    Rejected {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    #[serde(flatten)]
    pub result: StepResult,
    /// The step justified the conclusion; `session` already shows the next problem.
    pub completed: bool,
    pub unsolicited: Option<HintView>,
    pub session: ApiSession,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HintResponse {
    pub hint: HintView,
    pub session: ApiSession,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeleteResponse {
    pub removed: Vec<(NodeId, Formula)>,
    pub reverted: Vec<NodeId>,
    pub session: ApiSession,
}

fn view(state: &AppState, e: &Entry) -> ApiSession {
    session_view(&e.run, e.condition, &state.node_stats)
}

async fn problems(State(state): State<Shared>) -> Json<Vec<ProblemView>> {
    Json(state.curriculum.sequence().into_iter().map(ProblemView::from).collect())
}

async fn create_session(State(state): State<Shared>, Json(req): Json<CreateSession>) -> Result<Response, ApiError> {
    if req.student.trim().is_empty() {
        return Err(ApiError::BadRequest("student id is empty".into()));
    }
    let entry = state.create(&req.student, req.condition)?;
    let e = entry.lock().expect("session lock");
    Ok((StatusCode::CREATED, Json(view(&state, &e))).into_response())
}

async fn get_session(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<ApiSession>, ApiError> {
    let entry = state.entry(&id)?;
    let e = entry.lock().expect("session lock");
    Ok(Json(view(&state, &e)))
}

async fn step(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<StepRequest>,
) -> Result<Response, ApiError> {
    let rule: RuleId = req
        .rule
        .parse()
        .map_err(|_| ApiError::BadRequest(format!("unknown rule {}", req.rule)))?;
    let claimed = req
        .claimed
        .as_deref()
        .map(str::parse::<Formula>)
        .transpose()
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let entry = state.entry(&id)?;
    let mut e = entry.lock().expect("session lock");
    let report = e.run.step(&req.premises, rule, claimed.as_ref(), state.now())?;
    let (result, status) = match report.outcome {
        StepOutcome::Derived {
            node,
            statement,
            justified_hint,
            ..
        } => (
            StepResult::Derived {
                node,
                statement,
                justified_hint,
            },
            StatusCode::OK,
        ),
        StepOutcome::NeedsInput { options } => (StepResult::NeedsInput { options }, StatusCode::OK),
        StepOutcome::Redundant { existing } => (StepResult::Redundant { existing }, StatusCode::OK),
        StepOutcome::Rejected { error } => (
            StepResult::Rejected {
                error: error.to_string(),
            },
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
    };
    let body = StepResponse {
        result,
        completed: report.completed,
        unsolicited: report.unsolicited.as_ref().map(HintView::from),
        session: view(&state, &e),
    };
    Ok((status, Json(body)).into_response())
}

async fn hint(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<HintResponse>, ApiError> {
    let entry = state.entry(&id)?;
    let mut e = entry.lock().expect("session lock");
    let shown = e.run.request_hint(state.now())?;
    Ok(Json(HintResponse {
        hint: HintView::from(&shown),
        session: view(&state, &e),
    }))
}

async fn delete(
    State(state): State<Shared>,
    Path((id, nid)): Path<(String, usize)>,
) -> Result<Json<DeleteResponse>, ApiError> {
    let entry = state.entry(&id)?;
    let mut e = entry.lock().expect("session lock");
    let report = e.run.delete(NodeId(nid), state.now())?;
    Ok(Json(DeleteResponse {
        removed: report.removed,
        reverted: report.reverted,
        session: view(&state, &e),
    }))
}

async fn restart(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<ApiSession>, ApiError> {
    let entry = state.entry(&id)?;
    let mut e = entry.lock().expect("session lock");
    e.run.restart(state.now())?;
    Ok(Json(view(&state, &e)))
}

async fn skip(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<ApiSession>, ApiError> {
    let entry = state.entry(&id)?;
    let mut e = entry.lock().expect("session lock");
    e.run.skip(state.now())?;
    Ok(Json(view(&state, &e)))
}
