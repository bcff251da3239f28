//! HTTP API over a loaded model book.
//!
//! The service keeps no sessions: every ramp travels as a sealed
//! [`RampState`] that the client sends back with the next edit.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rampforge_core::colorspace::{parse_hex, srgb_to_lab, LabColor};
use rampforge_core::generator::{
    gamut_fit, sample_ramp, seed_sequential, GamutMode, GenError, GeneratedKind, GeneratedRamp,
};
use rampforge_core::modelbook::ModelBook;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tower_http::services::ServeDir;

use crate::book;
use crate::export::hex;
use crate::state::{EditDto, RampState, StateError};

pub const DEFAULT_PORT: u16 = 8080;
/// Seed used for catalog previews.
pub const PREVIEW_SEED: &str = "#808080";

#[derive(Clone)]
struct AppState {
    book: Arc<ModelBook>,
    key: Arc<str>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SealedState {
    pub payload: RampState,
    pub seal: String,
}

fn seal(key: &str, payload: &RampState) -> String {
    let body = serde_json::to_string(payload).expect("state serializes");
    let mut h = Sha256::new();
    h.update(key.as_bytes());
    h.update(b"\n");
    h.update(body.as_bytes());
    format!("{:x}", h.finalize())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRequest {
    pub model_id: String,
    pub seed_hex: String,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub arm_rotation: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformRequest {
    pub state: SealedState,
    pub edit: EditDto,
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RampResponse {
    pub model_id: String,
    pub kind: String,
    pub colors_hex: Vec<String>,
    pub colors_lab: Vec<[f64; 3]>,
    pub curve_projection_ab: Vec<[f64; 2]>,
    pub curve_projection_lc: Vec<[f64; 2]>,
    pub gamut_status: String,
    pub anchor_index: usize,
    pub state: SealedState,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub method: String,
    pub cluster_size: usize,
    pub l_profile: Vec<f64>,
    pub preview_hex: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Catalog {
    pub models: Vec<CatalogEntry>,
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

impl From<StateError> for ApiError {
    fn from(e: StateError) -> Self {
        let code = match e {
            StateError::UnknownModel(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError(code, e.to_string())
    }
}

impl From<GenError> for ApiError {
    fn from(e: GenError) -> Self {
        ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(e.status(), e.body_text())
    }
}

fn round6(v: f64) -> f64 {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn respond(app: &AppState, payload: RampState, ramp: &GeneratedRamp, n: Option<usize>) -> Result<RampResponse, ApiError> {
    let colors: Vec<LabColor> = match n {
        Some(n) if n != ramp.colors.len() => sample_ramp(ramp, n)?,
        _ => ramp.colors.clone(),
    };
    let r2 = |p: [f64; 2]| p.map(round6);
    Ok(RampResponse {
        model_id: ramp.model_id.clone(),
        kind: ramp.kind.as_str().into(),
        colors_hex: colors.iter().map(|c| hex(*c)).collect(),
        colors_lab: colors.iter().map(|c| c.to_array().map(round6)).collect(),
        curve_projection_ab: ramp.projection_ab().into_iter().map(r2).collect(),
        curve_projection_lc: ramp.projection_lc().into_iter().map(r2).collect(),
        gamut_status: ramp.gamut_status.as_str().into(),
        anchor_index: ramp.anchor_index,
        state: SealedState {
            seal: seal(&app.key, &payload),
            payload,
        },
    })
}

async fn health(State(app): State<AppState>) -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "models": app.book.models.len() }))
}

fn preview(book: &ModelBook, id: &str) -> Vec<String> {
    let seed = srgb_to_lab(parse_hex(PREVIEW_SEED).expect("valid preview seed"));
    book.model(id)
        .and_then(|m| seed_sequential(m, seed).ok())
        .and_then(|r| gamut_fit(&r, GamutMode::Clip).ok())
        .map(|r| r.colors.iter().map(|c| hex(*c)).collect())
        .unwrap_or_default()
}

/// The catalog served by `GET /api/models`, ordered by id.
pub fn catalog(book: &ModelBook) -> Catalog {
    let mut models: Vec<_> = book.models.iter().collect();
    models.sort_by(|a, b| a.id.cmp(&b.id));
    Catalog {
        models: models
            .into_iter()
            .map(|m| CatalogEntry {
                id: m.id.clone(),
                method: m.method.as_str().into(),
                cluster_size: m.cluster_size,
                l_profile: m.l_profile.iter().map(|v| round6(*v)).collect(),
                preview_hex: preview(book, &m.id),
            })
            .collect(),
    }
}

async fn models(State(app): State<AppState>) -> Json<Catalog> {
    Json(catalog(&app.book))
}

async fn seed(
    State(app): State<AppState>,
    req: Result<Json<SeedRequest>, JsonRejection>,
) -> Result<Json<RampResponse>, ApiError> {
    let Json(req) = req?;
    let kind = match req.kind.as_deref().unwrap_or("sequential").parse::<GeneratedKind>() {
        Ok(k @ (GeneratedKind::Sequential | GeneratedKind::Diverging)) => k,
        _ => return Err(StateError::BadKind(req.kind.unwrap_or_default()).into()),
    };
    if app.book.model(&req.model_id).is_none() {
        return Err(StateError::UnknownModel(req.model_id).into());
    }
    parse_hex(&req.seed_hex).map_err(|e| StateError::BadSeed(e.to_string()))?;
    let mut payload = RampState::new(&req.model_id, &req.seed_hex, kind, GamutMode::Clip);
    payload.arm_rotation_degrees = req.arm_rotation.unwrap_or(0.0);
    let ramp = payload.replay(&app.book)?;
    Ok(Json(respond(&app, payload, &ramp, req.n)?))
}

async fn transform(
    State(app): State<AppState>,
    req: Result<Json<TransformRequest>, JsonRejection>,
) -> Result<Json<RampResponse>, ApiError> {
    let Json(req) = req?;
    if seal(&app.key, &req.state.payload) != req.state.seal {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            "state seal does not match; the state was not issued by this model book".into(),
        ));
    }
    let (payload, ramp) = req.state.payload.transform(&app.book, req.edit.into())?;
    Ok(Json(respond(&app, payload, &ramp, req.n)?))
}

/// Routes for a model book, optionally serving static files under `/`.
pub fn router(book: ModelBook, static_dir: Option<PathBuf>) -> Router {
    let key: Arc<str> = format!("{:x}", Sha256::digest(book::to_json(&book).as_bytes())).into();
    let app = AppState {
        book: Arc::new(book),
        key,
    };
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/models", get(models))
        .route("/api/seed", post(seed))
        .route("/api/transform", post(transform))
        .with_state(app);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(book: ModelBook, port: u16, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(book, static_dir)).await
}
