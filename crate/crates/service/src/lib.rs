//! HTTP backend for the capture and report screens.
//!
//! | route | result |
//! |---|---|
//! | `POST /api/v1/sessions` | 201 `{id, validation}`; 400 on parse errors; 413 above the body limit |
//! | `GET /api/v1/sessions/{id}/features` | 200 `{columns, values, missing_mask}`; 404 |
//! | `GET /api/v1/sessions/{id}/screening` | 200 report; 404; 503 without a bundle |
//! | `GET /api/v1/tasks` | 200 task definitions and layouts |

pub mod api;
pub mod store;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use inkscreen_core::bundle::TrainedBundle;
use inkscreen_core::features::{extract_session_features, session_columns, FeatureConfig, SessionFeatureVector, SESSION_FEATURES};
use inkscreen_core::stroke::{parse_session, validate_session, DrawingSession};
use inkscreen_core::synth::TmtLayout;
use ndarray::Array2;
use tower_http::cors::{AllowOrigin, CorsLayer};

use api::{ErrorBody, ErrorDetail, FeatureResponse, ScreeningReport, SessionCreated, TaskHighlights, API_SCHEMA_VERSION};
pub use store::SessionStore;

pub const DEFAULT_BODY_LIMIT: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub body_limit: usize,
    /// Origin allowed by CORS; any origin when `None`.
    pub allow_origin: Option<HeaderValue>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            body_limit: DEFAULT_BODY_LIMIT,
            allow_origin: None,
        }
    }
}

pub struct AppState {
    store: SessionStore,
    bundle: Option<TrainedBundle>,
    features: FeatureConfig,
    layout: TmtLayout,
    config: ServiceConfig,
}

impl AppState {
    /// Extraction follows the bundle's feature settings when one is loaded.
    pub fn new(store: SessionStore, bundle: Option<TrainedBundle>, config: ServiceConfig) -> Self {
        AppState {
            features: bundle.as_ref().map(|b| b.features).unwrap_or_default(),
            store,
            bundle,
            layout: TmtLayout::builtin().clone(),
            config,
        }
    }
}

#[derive(Debug)]
enum ApiError {
    BadRequest { kind: &'static str, message: String },
    Rejected(BytesRejection),
    NotFound(String),
    NoBundle,
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match self {
            ApiError::BadRequest { kind, message } => (StatusCode::BAD_REQUEST, kind.to_string(), message),
            ApiError::Rejected(r) => {
                let kind = if r.status() == StatusCode::PAYLOAD_TOO_LARGE { "PayloadTooLarge" } else { "BadBody" };
                (r.status(), kind.to_string(), r.body_text())
            }
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, "NotFound".into(), format!("no session with id {id:?}")),
            ApiError::NoBundle => (
                StatusCode::SERVICE_UNAVAILABLE,
                "NoBundle".into(),
                "no trained bundle is loaded".into(),
            ),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "Internal".into(), m),
        };
        let body = ErrorBody {
            schema_version: API_SCHEMA_VERSION,
            error: ErrorDetail { kind, message },
        };
        (status, Json(body)).into_response()
    }
}

type Shared = Arc<AppState>;

/// Runs blocking parse and model work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn create_session(State(state): State<Shared>, body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let body = body.map_err(ApiError::Rejected)?;
    let created = blocking(move || {
        let session = parse_session(&body).map_err(|e| ApiError::BadRequest {
            kind: e.kind(),
            message: e.to_string(),
        })?;
        let id = state.store.put(&body).map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(SessionCreated {
            schema_version: API_SCHEMA_VERSION,
            id,
            validation: validate_session(&session),
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

fn load(state: &AppState, id: &str) -> Result<DrawingSession, ApiError> {
    let bytes = state
        .store
        .get(id)
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .ok_or_else(|| ApiError::NotFound(id.to_string()))?;
    parse_session(&bytes).map_err(|e| ApiError::Internal(format!("stored session no longer parses: {e}")))
}

fn features_of(state: &AppState, id: &str) -> Result<SessionFeatureVector, ApiError> {
    Ok(extract_session_features(&load(state, id)?, &state.features))
}

async fn session_features(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<FeatureResponse>, ApiError> {
    blocking(move || {
        let v = features_of(&state, &id)?;
        Ok(Json(FeatureResponse {
            schema_version: API_SCHEMA_VERSION,
            id,
            columns: session_columns(),
            values: v.values().to_vec(),
            missing_mask: v.missing_mask(),
        }))
    })
    .await
}

async fn screening(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<ScreeningReport>, ApiError> {
    if state.bundle.is_none() {
        return Err(ApiError::NoBundle);
    }
    blocking(move || {
        let bundle = state.bundle.as_ref().ok_or(ApiError::NoBundle)?;
        let session = load(&state, &id)?;
        let v = extract_session_features(&session, &state.features);
        let row = Array2::from_shape_vec((1, SESSION_FEATURES), v.to_nan_row()).expect("registry width");
        let prediction = bundle
            .predict(row.view())
            .map_err(|e| ApiError::Internal(e.to_string()))?
            .pop()
            .ok_or_else(|| ApiError::Internal("empty prediction".into()))?;
        let highlights = session
            .recordings()
            .map(|r| {
                let t = r.task();
                (
                    t,
                    TaskHighlights {
                        speed_median: v.get(t, "speed_median"),
                        pause_mean: v.get(t, "pause_mean"),
                        pressure_median: v.get(t, "pressure_median"),
                    },
                )
            })
            .collect();
        Ok(Json(ScreeningReport {
            schema_version: API_SCHEMA_VERSION,
            id,
            probabilities: prediction.probabilities,
            predicted_diagnosis: prediction.predicted_diagnosis,
            mmse: prediction.mmse,
            mtl_atrophy_z: prediction.mtl_atrophy_z,
            highlights,
        }))
    })
    .await
}

async fn tasks(State(state): State<Shared>) -> Json<api::TasksResponse> {
    Json(api::task_definitions(&state.layout))
}

pub fn router(state: AppState) -> Router {
    let origin = match &state.config.allow_origin {
        Some(o) => AllowOrigin::exact(o.clone()),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let limit = state.config.body_limit;
    Router::new()
        .route("/api/v1/sessions", post(create_session))
        .route("/api/v1/sessions/{id}/features", get(session_features))
        .route("/api/v1/sessions/{id}/screening", get(screening))
        .route("/api/v1/tasks", get(tasks))
        .layer(DefaultBodyLimit::max(limit))
        .layer(cors)
        .with_state(Arc::new(state))
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
