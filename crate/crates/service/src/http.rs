//! HTTP interface under `/v1`. Bodies are JSON; errors look like
//! `{"error": {"code": "...", "message": "..."}}`, plus `report` for
//! infeasible constraints.

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lexloop_core::domain::FeedbackConstraint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::service::{LearnRequest, SessionService};
use crate::session::{AltDoc, Choice};
use crate::ServiceError;

pub const API_PREFIX: &str = "/v1";

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            Self::Validation(_) => StatusCode::BAD_REQUEST,
            Self::NoRoute(_) | Self::UnknownSession(_) | Self::UnknownVersion(_) => StatusCode::NOT_FOUND,
            Self::Finalized
            | Self::PairMismatch
            | Self::NoPendingQuery
            | Self::Exhausted
            | Self::Infeasible(_)
            | Self::NotReady
            | Self::NoData => StatusCode::CONFLICT,
            Self::UnsupportedScale(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::Storage(_) | Self::CorruptLog { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let mut error = json!({ "code": self.code(), "message": self.to_string() });
        if let Self::Infeasible(report) = &self {
            error["report"] = serde_json::to_value(report).expect("report serializes");
        }
        (self.status(), Json(json!({ "error": error }))).into_response()
    }
}

type Shared = State<Arc<SessionService>>;
type Reply = Result<Response, ServiceError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(t)| t)
        .map_err(|e| ServiceError::Validation(e.body_text()))
}

/// Runs blocking service work off the async executor.
async fn blocking<T: Serialize + Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Reply {
    let out = tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Storage(format!("worker failed: {e}")))??;
    Ok(Json(out).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    domain: Value,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerBody {
    first: AltDoc,
    second: AltDoc,
    choice: Choice,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeedbackBody {
    constraints: Vec<FeedbackConstraint>,
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn create(State(svc): Shared, payload: Result<Json<CreateBody>, JsonRejection>) -> Reply {
    let req = body(payload)?;
    let text = req.domain.to_string();
    let id = tokio::task::spawn_blocking(move || svc.create_session(&text, req.seed))
        .await
        .map_err(|e| ServiceError::Storage(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "status": "eliciting" }))).into_response())
}

async fn list(State(svc): Shared) -> Reply {
    blocking(move || Ok(json!({ "sessions": svc.list()? }))).await
}

async fn show(State(svc): Shared, Path(id): Path<String>) -> Reply {
    blocking(move || Ok(svc.session(&id)?.view())).await
}

async fn query(State(svc): Shared, Path(id): Path<String>) -> Reply {
    blocking(move || svc.next_query(&id)).await
}

async fn answer(State(svc): Shared, Path(id): Path<String>, payload: Result<Json<AnswerBody>, JsonRejection>) -> Reply {
    let req = body(payload)?;
    blocking(move || svc.submit_answer(&id, &req.first, &req.second, req.choice)).await
}

async fn learn(
    State(svc): Shared,
    Path(id): Path<String>,
    payload: Result<Json<LearnRequest>, JsonRejection>,
) -> Reply {
    let req = body(payload)?;
    blocking(move || svc.learn_model(&id, &req)).await
}

async fn feedback(
    State(svc): Shared,
    Path(id): Path<String>,
    payload: Result<Json<FeedbackBody>, JsonRejection>,
) -> Reply {
    let req = body(payload)?;
    blocking(move || svc.submit_feedback(&id, &req.constraints)).await
}

async fn latest_model(State(svc): Shared, Path(id): Path<String>) -> Reply {
    blocking(move || svc.get_model(&id, None)).await
}

async fn model_version(State(svc): Shared, Path((id, version)): Path<(String, String)>) -> Reply {
    let version = version
        .parse::<u64>()
        .map_err(|_| ServiceError::Validation(format!("version must be a number or \"latest\", got {version:?}")))?;
    blocking(move || svc.get_model(&id, Some(version))).await
}

async fn finalize(State(svc): Shared, Path(id): Path<String>) -> Reply {
    blocking(move || Ok(json!({ "status": svc.finalize(&id)? }))).await
}

async fn not_found(uri: axum::http::Uri) -> ServiceError {
    ServiceError::NoRoute(uri.path().to_string())
}

pub fn router(service: Arc<SessionService>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/query", get(query))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/learn", post(learn))
        .route("/sessions/{id}/feedback", post(feedback))
        .route("/sessions/{id}/models/latest", get(latest_model))
        .route("/sessions/{id}/models/{version}", get(model_version))
        .route("/sessions/{id}/finalize", post(finalize));
    Router::new()
        .nest(API_PREFIX, api)
        .fallback(not_found)
        .with_state(service)
}

/// Serves until `shutdown` resolves. Every event is on disk once its
/// request returns, so stopping needs no extra flush.
pub async fn serve(
    service: Arc<SessionService>,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let addr: Option<SocketAddr> = listener.local_addr().ok();
    tracing::info!(?addr, "listening");
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Resolves on Ctrl-C or, on Unix, SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
