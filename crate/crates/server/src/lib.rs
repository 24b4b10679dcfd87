//! Read-only HTTP/JSON API over `handkin`.
//!
//! All state is loaded before the listener is bound and never mutated, so
//! responses depend only on the request.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use handkin::choreography::{trajectory_metrics, validate_trajectory, DEFAULT_MAX_STEP_DEG};
use handkin::gestures::check_executable;
use handkin::hand::hand_kinematics;
use handkin::{
    compile_script, interpolate_segment, CouplingConfig, Error, GestureCategory, GestureSet,
    HandPose, HandSpec, ManipulationScript,
};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

/// Immutable data shared by every request.
pub struct AppState {
    spec: HandSpec,
    spec_document: String,
    gestures: GestureSet,
    coupling: CouplingConfig,
}

impl AppState {
    /// `spec_document` is served verbatim from `/api/hand-spec`.
    pub fn new(spec_document: String, gestures: GestureSet) -> handkin::Result<Self> {
        let spec = HandSpec::from_json(&spec_document)?;
        let coupling = CouplingConfig::from_spec(&spec)?;
        Ok(AppState {
            spec,
            spec_document,
            gestures,
            coupling,
        })
    }

    pub fn builtin() -> Self {
        AppState::new(
            handkin::builtin::HAND_SPEC_JSON.to_string(),
            handkin::builtin::gesture_set(),
        )
        .expect("bundled data is valid")
    }
}

/// Error body: `{code, message, details}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    details: Value,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code,
            message: message.into(),
            details: Value::Null,
        }
    }

    fn from_lib(status: StatusCode, code: &'static str, err: Error) -> Self {
        let details = match &err {
            Error::NotFound { id, suggestions } => json!({ "id": id, "suggestions": suggestions }),
            Error::GestureViolations { id, details } => json!({ "id": id, "violations": details }),
            Error::Schema { path, .. } | Error::Interval { path, .. } => json!({ "path": path }),
            _ => Value::Null,
        };
        ApiError {
            status,
            code,
            message: err.to_string(),
            details,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "details": self.details });
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        ApiError::bad_request("invalid_body", rejection.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(rejection: QueryRejection) -> Self {
        ApiError::bad_request("invalid_query", rejection.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/hand-spec", get(hand_spec))
        .route("/api/gestures", get(list_gestures))
        .route("/api/gestures/{id}", get(get_gesture))
        .route("/api/interpolate", post(interpolate))
        .route("/api/compile", post(compile))
        .route("/api/fk", post(fk))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let app = router(Arc::new(state));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app).await
}

async fn hand_spec(State(state): Shared) -> impl IntoResponse {
    (
        [(header::CONTENT_TYPE, "application/json")],
        state.spec_document.clone(),
    )
}

#[derive(Deserialize)]
struct CategoryQuery {
    category: Option<String>,
}

async fn list_gestures(
    State(state): Shared,
    query: Result<Query<CategoryQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(query) = query?;
    let records: Vec<_> = match query.category {
        None => state.gestures.records().iter().collect(),
        Some(name) => {
            let category: GestureCategory = name
                .parse()
                .map_err(|e| ApiError::from_lib(StatusCode::BAD_REQUEST, "invalid_category", e))?;
            state.gestures.by_category(category).collect()
        }
    };
    Ok(Json(json!({ "gestures": records })))
}

async fn get_gesture(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let record = state
        .gestures
        .find(&id)
        .map_err(|e| ApiError::from_lib(StatusCode::NOT_FOUND, "not_found", e))?;
    Ok(Json(json!(record)))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PoseRef {
    Gesture(String),
    Pose(HandPose),
}

impl PoseRef {
    fn resolve(&self, set: &GestureSet) -> ApiResult<HandPose> {
        match self {
            PoseRef::Gesture(id) => set
                .find(id)
                .map(|g| g.pose)
                .map_err(|e| ApiError::from_lib(StatusCode::BAD_REQUEST, "unknown_gesture", e)),
            PoseRef::Pose(p) => Ok(*p),
        }
    }
}

#[derive(Deserialize)]
struct InterpolateRequest {
    from: PoseRef,
    to: PoseRef,
    #[serde(rename = "T")]
    interval_frames: i64,
}

async fn interpolate(
    State(state): Shared,
    body: Result<Json<InterpolateRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(req) = body?;
    let interval = u32::try_from(req.interval_frames)
        .ok()
        .filter(|t| *t >= 1)
        .ok_or_else(|| {
            ApiError::bad_request(
                "invalid_interval",
                format!("T must be at least 1, got {}", req.interval_frames),
            )
        })?;
    let from = req.from.resolve(&state.gestures)?;
    let to = req.to.resolve(&state.gestures)?;
    let frames = interpolate_segment(&from, &to, interval)
        .map_err(|e| ApiError::from_lib(StatusCode::BAD_REQUEST, "invalid_interval", e))?;
    let validation: Vec<_> = frames
        .iter()
        .map(|f| check_executable(f, &state.spec, &state.coupling))
        .collect();
    Ok(Json(json!({ "frames": frames, "validation": validation })))
}

#[derive(Deserialize)]
struct CompileRequest {
    script: Value,
}

async fn compile(
    State(state): Shared,
    body: Result<Json<CompileRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(req) = body?;
    let script: ManipulationScript = serde_json::from_value(req.script)
        .map_err(|e| ApiError::from_lib(StatusCode::BAD_REQUEST, "invalid_script", e.into()))?;
    let trajectory = compile_script(&script, &state.gestures)
        .map_err(|e| ApiError::from_lib(StatusCode::BAD_REQUEST, "compile_error", e))?;
    let validation = validate_trajectory(
        &trajectory,
        &state.spec,
        &state.coupling,
        DEFAULT_MAX_STEP_DEG,
    );
    Ok(Json(json!({
        "trajectory": trajectory,
        "metrics": trajectory_metrics(&trajectory),
        "validation": validation,
    })))
}

#[derive(Deserialize)]
struct FkRequest {
    pose: HandPose,
}

async fn fk(
    State(state): Shared,
    body: Result<Json<FkRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(req) = body?;
    let digits = hand_kinematics(&req.pose, &state.spec)
        .map_err(|e| ApiError::from_lib(StatusCode::BAD_REQUEST, "kinematics_error", e))?;
    Ok(Json(json!({ "digits": digits })))
}
