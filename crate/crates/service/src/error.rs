use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use prooftutor_core::proof::ProofError;
use prooftutor_core::session::SessionError;

/// Body of every error response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub error: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("UnknownSession: no session {0}")]
    UnknownSession(String),
    #[error("DuplicateSession: student {0} already has a session")]
    DuplicateSession(String),
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

impl ApiError {
    fn status_and_code(&self) -> (StatusCode, &'static str) {
        use SessionError as S;
        match self {
            ApiError::UnknownSession(_) => (StatusCode::NOT_FOUND, "UnknownSession"),
            ApiError::DuplicateSession(_) => (StatusCode::CONFLICT, "DuplicateSession"),
            ApiError::BadRequest(_) => (StatusCode::UNPROCESSABLE_ENTITY, "BadRequest"),
            ApiError::Session(e) => match e {
                S::PhaseForbidsHints(_) | S::PhaseForbidsSkip(_) | S::HintsDisabled => (StatusCode::FORBIDDEN, "PhaseForbids"),
                S::HintAlreadyPresent => (StatusCode::CONFLICT, "HintAlreadyPresent"),
                S::NoHint(_) => (StatusCode::NOT_FOUND, "NoHint"),
                S::NoActiveProblem => (StatusCode::CONFLICT, "NoActiveProblem"),
                S::ProblemInProgress => (StatusCode::CONFLICT, "ProblemInProgress"),
                S::Log(_) => (StatusCode::INTERNAL_SERVER_ERROR, "LogError"),
                S::Proof(p) => match p {
                    ProofError::ProtectedNode(_) => (StatusCode::FORBIDDEN, "ProtectedNode"),
                    ProofError::UnknownNode(_) => (StatusCode::NOT_FOUND, "UnknownNode"),
                    ProofError::HintAlreadyPresent => (StatusCode::CONFLICT, "HintAlreadyPresent"),
                    ProofError::AlreadyComplete => (StatusCode::CONFLICT, "AlreadyComplete"),
                    _ => (StatusCode::UNPROCESSABLE_ENTITY, "ProofError"),
                },
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.status_and_code();
        let body = ErrorBody {
            code: code.to_string(),
            error: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}
