//! HTTP routes over [`TelemetryService`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lakeland_core::api::{CreateClassResponse, ErrorBody, IngestRequest, RegisterRequest, RegisterResponse};
use lakeland_core::features::{ModelInfo, MODEL_CATALOG};
use lakeland_core::registry::RegistryError;
use lakeland_core::ClassCode;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tracing::error;

use crate::error::ServiceError;
use crate::service::TelemetryService;

type Shared = Arc<TelemetryService>;

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self(e)
    }
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match &self.0 {
            ServiceError::Registry(e) => match e {
                RegistryError::UnknownClass(_) | RegistryError::NotRegistered(_) => StatusCode::NOT_FOUND,
                RegistryError::DuplicateName(_)
                | RegistryError::DuplicateClass(_)
                | RegistryError::DuplicateSession(_) => StatusCode::CONFLICT,
                RegistryError::InvalidName => StatusCode::BAD_REQUEST,
                RegistryError::Exhausted => StatusCode::SERVICE_UNAVAILABLE,
            },
            ServiceError::UnknownClassCode(_) => StatusCode::NOT_FOUND,
            ServiceError::SequenceGap { .. } => StatusCode::CONFLICT,
            ServiceError::Malformed(_) => StatusCode::BAD_REQUEST,
            ServiceError::Storage(_) | ServiceError::DataDirUnwritable { .. } | ServiceError::CorruptLog(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            error!(error = %self.0, "request failed");
        }
        (status, Json(self.0.body())).into_response()
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::Malformed(format!("bad request body: {e}")).into())
}

/// A code that cannot parse cannot name a class.
fn parse_code(raw: &str) -> Result<ClassCode, ApiError> {
    ClassCode::parse(raw).map_err(|_| ApiError(ServiceError::UnknownClassCode(raw.to_owned())))
}

/// Runs blocking service work (log writes) off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(ServiceError::Storage(std::io::Error::other(e.to_string()))))?
        .map_err(ApiError)
}

async fn create_class(State(svc): State<Shared>) -> Result<(StatusCode, Json<CreateClassResponse>), ApiError> {
    let code = blocking(move || svc.create_class()).await?;
    Ok((StatusCode::CREATED, Json(CreateClassResponse { code })))
}

async fn register_player(
    State(svc): State<Shared>,
    Path(code): Path<String>,
    body: Bytes,
) -> Result<(StatusCode, Json<RegisterResponse>), ApiError> {
    let code = parse_code(&code)?;
    let req: RegisterRequest = parse_body(&body)?;
    let reg = blocking(move || svc.register_player(&code, &req.name)).await?;
    Ok((
        StatusCode::CREATED,
        Json(RegisterResponse {
            session_id: reg.session_id,
            play_url: reg.play_url,
        }),
    ))
}

async fn ingest(State(svc): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: IngestRequest = parse_body(&body)?;
    let ack = blocking(move || svc.ingest(req)).await?;
    Ok(Json(ack).into_response())
}

#[derive(Debug, Deserialize)]
struct DashboardQuery {
    /// Evaluate idle indicators and playing time at this wall-clock ms.
    at: Option<u64>,
}

async fn dashboard(
    State(svc): State<Shared>,
    Path(code): Path<String>,
    query: Result<Query<DashboardQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let code = parse_code(&code)?;
    let Query(query) = query.map_err(|e| ServiceError::Malformed(e.body_text()))?;
    let dash = svc.class_dashboard(&code, query.at)?;
    Ok(Json(dash).into_response())
}

/// Name, category and visualization of every dashboard model.
async fn models() -> Json<&'static [ModelInfo]> {
    Json(&MODEL_CATALOG)
}

async fn health(State(svc): State<Shared>) -> Response {
    Json(svc.health()).into_response()
}

async fn not_found() -> (StatusCode, Json<ErrorBody>) {
    (
        StatusCode::NOT_FOUND,
        Json(ErrorBody {
            error: "NOT_FOUND".into(),
            message: "no such route".into(),
            last_seq: None,
        }),
    )
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/api/classes", post(create_class))
        .route("/api/classes/{code}/players", post(register_player))
        .route("/api/classes/{code}/dashboard", get(dashboard))
        .route("/api/ingest", post(ingest))
        .route("/api/models", get(models))
        .route("/healthz", get(health))
        .fallback(not_found)
        .with_state(service)
}
