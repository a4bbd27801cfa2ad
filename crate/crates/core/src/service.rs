//! HTTP session service for external oracles.
//!
//! | method | path                         | body                                   |
//! |--------|------------------------------|----------------------------------------|
//! | POST   | `/sessions`                  | `{dpi \| netlist, config?}`            |
//! | GET    | `/sessions/{id}`             |                                        |
//! | POST   | `/sessions/{id}/answer`      | `{answer, iteration?, extra?}`         |
//! | GET    | `/sessions/{id}/transcript`  |                                        |

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::dpi_format::parse_dpi;
use crate::engine::{Answer, Goal, Session, SessionConfig};
use crate::error::Error;
use crate::logic::parse;
use crate::mbd::{parse_netlist, reduce};
use crate::qpartition::{Measure, QsmConfig};
use crate::query_enhance::EntailmentFilter;

struct Handle {
    created_at: u64,
    session: Session,
}

#[derive(Default)]
pub struct AppState {
    sessions: Mutex<HashMap<String, Arc<Mutex<Handle>>>>,
    next_id: AtomicU64,
}

pub type SharedState = Arc<AppState>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Syntax { .. } | Error::Format { .. } | Error::InvalidDpi(_) | Error::UnknownSentence(_) => {
                StatusCode::BAD_REQUEST
            }
            Error::Config(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Session(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigBody {
    pub n_leading: Option<usize>,
    pub qsm: Option<String>,
    pub threshold: Option<f64>,
    pub qcm: Option<String>,
    pub enhance: Option<bool>,
    pub goal: Option<String>,
    pub et: Option<String>,
}

impl ConfigBody {
    pub fn to_config(&self) -> Result<SessionConfig, Error> {
        let mut c = SessionConfig::default();
        if let Some(n) = self.n_leading {
            c.n_leading = n;
        }
        let measure = match &self.qsm {
            Some(s) => s.parse::<Measure>()?,
            None => c.qsm.measure,
        };
        c.qsm = QsmConfig::new(measure, self.threshold.unwrap_or(c.qsm.threshold))?;
        if let Some(s) = &self.qcm {
            c.qcm = s.parse()?;
        }
        if let Some(e) = self.enhance {
            c.enhance = e;
        }
        if let Some(g) = &self.goal {
            c.goal = g.parse::<Goal>()?;
        }
        if let Some(et) = &self.et {
            c.filter = EntailmentFilter::parse_kinds(et)?;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateBody {
    pub dpi: Option<String>,
    pub netlist: Option<String>,
    #[serde(default)]
    pub config: ConfigBody,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerBody {
    pub answer: String,
    pub iteration: Option<usize>,
    #[serde(default)]
    pub extra: Vec<String>,
}

pub fn router() -> Router {
    router_with_state(SharedState::default())
}

pub fn router_with_state(state: SharedState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_state))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/transcript", get(transcript))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves the API on `0.0.0.0:port` until the process ends.
pub async fn serve(port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    axum::serve(listener, router()).await
}

fn state_json(id: &str, h: &Handle) -> Value {
    let mut v = h.session.state_json();
    v["id"] = json!(id);
    v["created_at"] = json!(h.created_at);
    v
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<Mutex<Handle>>, ApiError> {
    state
        .sessions
        .lock()
        .expect("session table lock")
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {id}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

async fn create_session(
    State(state): State<SharedState>,
    Json(body): Json<CreateBody>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let config = body.config.to_config()?;
    let dpi = match (&body.dpi, &body.netlist) {
        (Some(text), None) => parse_dpi(text)?,
        (None, Some(text)) => reduce(&parse_netlist(text)?)?.dpi,
        _ => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "exactly one of `dpi` and `netlist` is required",
            ))
        }
    };
    let session = blocking(move || Session::new(dpi, config)).await??;
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    let created_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let handle = Handle { created_at, session };
    let body = state_json(&id, &handle);
    state
        .sessions
        .lock()
        .expect("session table lock")
        .insert(id, Arc::new(Mutex::new(handle)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn get_state(State(state): State<SharedState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let handle = lookup(&state, &id)?;
    let h = handle.lock().expect("session lock");
    Ok(Json(state_json(&id, &h)))
}

async fn transcript(State(state): State<SharedState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let handle = lookup(&state, &id)?;
    let h = handle.lock().expect("session lock");
    Ok(Json(h.session.transcript_json()))
}

async fn answer(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    Json(body): Json<AnswerBody>,
) -> Result<Json<Value>, ApiError> {
    let handle = lookup(&state, &id)?;
    let ans: Answer = body
        .answer
        .parse()
        .map_err(|e: Error| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let extra = body
        .extra
        .iter()
        .map(|s| parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    blocking(move || {
        let mut h = handle.lock().expect("session lock");
        let pending = h
            .session
            .pending()
            .map(|p| p.iteration)
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no pending query"))?;
        if let Some(it) = body.iteration {
            if it != pending {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    format!("answer for iteration {it}, but iteration {pending} is pending"),
                ));
            }
        }
        h.session.step_with(ans, extra)?;
        Ok(Json(state_json(&id, &h)))
    })
    .await?
}
