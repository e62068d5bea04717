use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::Serialize;

use prooftutor_core::hints::HintType;
use prooftutor_core::proof::NodeId;
use prooftutor_core::session::Curriculum;

use crate::error::ErrorBody;
use crate::routes::{CreateSession, DeleteResponse, HintResponse, StepRequest, StepResponse, StepResult};
use crate::view::{ApiSession, ProblemView, ScriptedStep};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    #[error("{status}: {}", body.error)]
    Api { status: StatusCode, body: ErrorBody },
    #[error("{0}")]
    Script(String),
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            _ => None,
        }
    }
}

/// Headless client for the tutor API.
#[derive(Debug, Clone)]
pub struct TutorClient {
    base: String,
    http: reqwest::Client,
}

impl TutorClient {
    pub fn new(base: impl Into<String>) -> TutorClient {
        TutorClient {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        Err(ClientError::Api {
            status,
            body: resp.json().await?,
        })
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ClientError> {
        let resp = self.http.post(format!("{}{path}", self.base)).json(body).send().await?;
        Self::decode(resp).await
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        let resp = self.http.get(format!("{}{path}", self.base)).send().await?;
        Self::decode(resp).await
    }

    pub async fn problems(&self) -> Result<Vec<ProblemView>, ClientError> {
        self.get("/problems").await
    }

    pub async fn create_session(&self, student: &str, condition: Option<HintType>) -> Result<ApiSession, ClientError> {
        let body = CreateSession {
            student: student.to_string(),
            condition,
        };
        self.post("/sessions", &body).await
    }

    pub async fn session(&self, sid: &str) -> Result<ApiSession, ClientError> {
        self.get(&format!("/sessions/{sid}")).await
    }

    /// A rejected step is an ordinary response carrying the error text.
    pub async fn step(&self, sid: &str, premises: &[NodeId], rule: &str, claimed: Option<&str>) -> Result<StepResponse, ClientError> {
        let body = StepRequest {
            premises: premises.to_vec(),
            rule: rule.to_string(),
            claimed: claimed.map(str::to_string),
        };
        let resp = self
            .http
            .post(format!("{}/sessions/{sid}/steps", self.base))
            .json(&body)
            .send()
            .await?;
        let status = resp.status();
        let text = resp.text().await?;
        if status.is_success() || status == StatusCode::UNPROCESSABLE_ENTITY {
            if let Ok(r) = serde_json::from_str::<StepResponse>(&text) {
                return Ok(r);
            }
        }
        match serde_json::from_str::<ErrorBody>(&text) {
            Ok(body) => Err(ClientError::Api { status, body }),
            Err(e) => Err(ClientError::Script(format!("{status}: unreadable response: {e}"))),
        }
    }

    pub async fn scripted_step(&self, sid: &str, s: &ScriptedStep) -> Result<StepResponse, ClientError> {
        self.step(sid, &s.premises, s.rule.name(), Some(&s.claimed.render())).await
    }

    pub async fn hint(&self, sid: &str) -> Result<HintResponse, ClientError> {
        self.post(&format!("/sessions/{sid}/hint"), &()).await
    }

    pub async fn delete(&self, sid: &str, node: NodeId) -> Result<DeleteResponse, ClientError> {
        self.post(&format!("/sessions/{sid}/nodes/{}/delete", node.0), &()).await
    }

    pub async fn restart(&self, sid: &str) -> Result<ApiSession, ClientError> {
        self.post(&format!("/sessions/{sid}/restart"), &()).await
    }

    pub async fn skip(&self, sid: &str) -> Result<ApiSession, ClientError> {
        self.post(&format!("/sessions/{sid}/skip"), &()).await
    }
}

/// Next step of the current problem's worked or expert script, addressed by
/// node ids.
pub fn expert_step(view: &ApiSession, curriculum: &Curriculum) -> Result<ScriptedStep, ClientError> {
    let cur = view.current.as_ref().ok_or_else(|| ClientError::Script("no problem in progress".into()))?;
    if let Some(s) = &cur.next_scripted_step {
        return Ok(s.clone());
    }
    let problem = curriculum
        .problem(&cur.problem.id)
        .ok_or_else(|| ClientError::Script(format!("unknown problem {}", cur.problem.id)))?;
    let step = problem
        .expert
        .iter()
        .find(|s| cur.proof.justified_id(&s.conclusion).is_none())
        .ok_or_else(|| ClientError::Script(format!("expert script of {} is exhausted", problem.id)))?;
    let premises = step
        .premises
        .iter()
        .map(|p| cur.proof.justified_id(p))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| ClientError::Script(format!("premises of {} are not on screen", step.conclusion)))?;
    Ok(ScriptedStep {
        premises,
        rule: step.rule,
        claimed: step.conclusion.clone(),
    })
}

/// Works through the rest of the curriculum by following each problem's
/// expert script, asking for a hint at the start of every problem that
/// allows one when `ask_hints` is set.
pub async fn run_curriculum(
    client: &TutorClient,
    sid: &str,
    curriculum: &Curriculum,
    ask_hints: bool,
) -> Result<ApiSession, ClientError> {
    let mut view = client.session(sid).await?;
    let limit = 100 * view.total.max(1);
    for _ in 0..limit {
        if view.finished {
            return Ok(view);
        }
        let cur = view.current.as_ref().expect("unfinished session has a problem");
        if ask_hints && cur.hints_enabled && cur.proof.step_count == 0 && cur.proof.pending_hint().is_none() {
            match client.hint(sid).await {
                Ok(r) => view = r.session,
                Err(ClientError::Api { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let step = expert_step(&view, curriculum)?;
        let resp = client.scripted_step(sid, &step).await?;
        let failure = match &resp.result {
            StepResult::Rejected { error } => Some(error.clone()),
            StepResult::NeedsInput { .. } => Some("the tutor asked for the statement".to_string()),
            _ => None,
        };
        if let Some(why) = failure {
            return Err(ClientError::Script(format!("{} by {}: {why}", step.claimed, step.rule)));
        }
        view = resp.session;
    }
    Err(ClientError::Script("curriculum did not finish".into()))
}
