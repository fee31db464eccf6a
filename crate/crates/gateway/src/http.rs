//! JSON-over-HTTP front end.
//!
//! | method | path                        | body                           |
//! |--------|-----------------------------|--------------------------------|
//! | POST   | `/learners`                 | `{name}`                       |
//! | POST   | `/learners/{id}/profiler`   | `{answers:[{item,option}]}`    |
//! | GET    | `/learners/{id}/progress`   |                                |
//! | POST   | `/sessions`                 | `{learner_id, concept_id?}`    |
//! | GET    | `/sessions/{id}`            |                                |
//! | POST   | `/sessions/{id}/input`      | `{answer}` or `{next:true}`    |
//! | POST   | `/sms/inbound`              | `{from, text}`                 |
//! | GET    | `/profiler`                 |                                |
//! | GET    | `/error-codes`              |                                |
//!
//! Errors come back as `{"code", "message"}`.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Request, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use tutor_core::learner::ProfilerAnswer;
use tutor_core::session::{Input, Prompt, SessionState};
use tutor_core::{ConceptId, LearnerId, SessionId};

use crate::error::{GatewayError, ERROR_CODES};
use crate::service::Gateway;

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = ErrorBody {
            code: self.code(),
            message: self.to_string(),
        };
        (status, axum::Json(body)).into_response()
    }
}

/// `axum::Json` with rejections reported in the API's error shape.
pub struct Json<T>(pub T);

impl<S, T> FromRequest<S> for Json<T>
where
    axum::Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = GatewayError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        axum::Json::<T>::from_request(req, state)
            .await
            .map(|axum::Json(v)| Json(v))
            .map_err(|e| GatewayError::bad_request("MalformedInput", e.body_text()))
    }
}

impl<T: Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        axum::Json(self.0).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct NewLearner {
    pub name: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LearnerCreated {
    pub learner_id: LearnerId,
}

#[derive(Debug, Deserialize)]
pub struct ProfilerSubmission {
    pub answers: Vec<ProfilerAnswer>,
}

#[derive(Debug, Deserialize)]
pub struct NewSession {
    pub learner_id: LearnerId,
    #[serde(default)]
    pub concept_id: Option<ConceptId>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionStarted {
    pub session_id: SessionId,
    pub prompt: Prompt,
}

/// Either a letter (`"B"`) or a 0-based index.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Index(usize),
    Letter(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputBody {
    #[serde(default)]
    pub answer: Option<AnswerValue>,
    #[serde(default)]
    pub next: Option<bool>,
}

impl InputBody {
    pub fn to_input(&self) -> Result<Input, GatewayError> {
        match (&self.answer, self.next) {
            (Some(a), None | Some(false)) => match a {
                AnswerValue::Index(i) => Ok(Input::Answer(*i)),
                AnswerValue::Letter(s) => match s.trim().to_ascii_uppercase().as_bytes() {
                    [c @ b'A'..=b'Z'] => Ok(Input::Answer((c - b'A') as usize)),
                    _ => Err(GatewayError::bad_request("MalformedInput", format!("answer {s:?} is not a letter"))),
                },
            },
            (None, Some(true)) => Ok(Input::Next),
            _ => Err(GatewayError::bad_request(
                "MalformedInput",
                "send exactly one of {\"answer\": ...} or {\"next\": true}",
            )),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InputReply {
    /// The prompt now showing.
    pub prompt: Prompt,
    /// Every prompt the input produced, ending with `prompt`.
    pub prompts: Vec<Prompt>,
    pub state: SessionState,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionView {
    pub prompt: Prompt,
    pub state: SessionState,
}

#[derive(Debug, Deserialize)]
pub struct SmsInbound {
    pub from: String,
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SmsOutbound {
    pub outbound: Vec<String>,
}

type AppState = Arc<Gateway>;

/// Runs blocking gateway work off the async executor.
async fn blocking<T: Send + 'static>(
    gw: AppState,
    f: impl FnOnce(&Gateway) -> Result<T, GatewayError> + Send + 'static,
) -> Result<T, GatewayError> {
    tokio::task::spawn_blocking(move || f(&gw))
        .await
        .map_err(|e| GatewayError::Config(format!("worker failed: {e}")))?
}

async fn create_learner(State(gw): State<AppState>, Json(body): Json<NewLearner>) -> Result<impl IntoResponse, GatewayError> {
    let learner_id = blocking(gw, move |g| g.create_learner(&body.name)).await?;
    Ok((StatusCode::CREATED, Json(LearnerCreated { learner_id })))
}

async fn submit_profiler(
    State(gw): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<ProfilerSubmission>,
) -> Result<impl IntoResponse, GatewayError> {
    let lid = LearnerId::new(id);
    Ok(Json(blocking(gw, move |g| g.submit_profile(&lid, &body.answers)).await?))
}

async fn progress(State(gw): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, GatewayError> {
    let lid = LearnerId::new(id);
    Ok(Json(blocking(gw, move |g| g.progress(&lid)).await?))
}

async fn start_session(State(gw): State<AppState>, Json(body): Json<NewSession>) -> Result<impl IntoResponse, GatewayError> {
    let (session_id, prompt) = blocking(gw, move |g| {
        if !g.store().exists(&body.learner_id) {
            return Err(GatewayError::UnknownLearner(body.learner_id.clone()));
        }
        g.start_session(&body.learner_id, body.concept_id.as_ref())
    })
    .await?;
    Ok((StatusCode::CREATED, Json(SessionStarted { session_id, prompt })))
}

async fn show_session(State(gw): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, GatewayError> {
    let sid = SessionId::new(id);
    let (prompt, state) = blocking(gw, move |g| g.session_prompt(&sid)).await?;
    Ok(Json(SessionView { prompt, state }))
}

async fn session_input(
    State(gw): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<InputBody>,
) -> Result<impl IntoResponse, GatewayError> {
    let input = body.to_input()?;
    let sid = SessionId::new(id);
    let step = blocking(gw, move |g| g.submit(&sid, input)).await?;
    let prompt = step.prompts.last().cloned().expect("every input yields a prompt");
    Ok(Json(InputReply {
        prompt,
        prompts: step.prompts,
        state: step.state,
    }))
}

async fn sms_inbound(State(gw): State<AppState>, Json(body): Json<SmsInbound>) -> Result<impl IntoResponse, GatewayError> {
    let outbound = blocking(gw, move |g| g.sms_inbound(&body.from, &body.text)).await?;
    Ok(Json(SmsOutbound { outbound }))
}

async fn profiler(State(gw): State<AppState>) -> impl IntoResponse {
    Json(gw.profiler().clone())
}

async fn error_codes() -> impl IntoResponse {
    Json(ERROR_CODES)
}

pub fn router(gw: Arc<Gateway>) -> Router {
    Router::new()
        .route("/learners", post(create_learner))
        .route("/learners/{id}/profiler", post(submit_profiler))
        .route("/learners/{id}/progress", get(progress))
        .route("/sessions", post(start_session))
        .route("/sessions/{id}", get(show_session))
        .route("/sessions/{id}/input", post(session_input))
        .route("/sms/inbound", post(sms_inbound))
        .route("/profiler", get(profiler))
        .route("/error-codes", get(error_codes))
        .with_state(gw)
}

pub async fn serve(gw: Arc<Gateway>, listen: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(gw))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
