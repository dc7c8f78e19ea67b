//! HTTP service: patient storage, recommendations and what-if queries.

pub mod store;

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::json;

use crate::kb::{self, default_kb, load_kb, Kb, KbError, PatientRecord};
pub use store::{IndexEntry, Store, StoreError, StoredPatient};

#[derive(Clone, Debug)]
pub struct Config {
    /// Empty means the bundled knowledge base.
    pub kb_paths: Vec<PathBuf>,
    pub store_dir: PathBuf,
}

pub struct AppState {
    config: Config,
    kb: RwLock<Arc<Kb>>,
    store: Store,
}

impl AppState {
    pub fn new(config: Config, kb: Kb) -> Result<AppState, StoreError> {
        let store = Store::open(&config.store_dir)?;
        Ok(AppState { config, kb: RwLock::new(Arc::new(kb)), store })
    }

    fn kb(&self) -> Arc<Kb> {
        self.kb.read().expect("kb lock").clone()
    }
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    Invalid { message: String, fields: Vec<kb::patient::FieldError> },
    NotFound(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({ "error": m })),
            ApiError::Invalid { message, fields } => {
                (StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": message, "fields": fields }))
            }
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({ "error": m })),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": m })),
        };
        (status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => ApiError::NotFound(e.to_string()),
            e => ApiError::Internal(e.to_string()),
        }
    }
}

impl From<KbError> for ApiError {
    fn from(e: KbError) -> Self {
        match e {
            KbError::Invalid(v) => ApiError::Invalid { message: v.to_string(), fields: v.errors },
            KbError::UnknownSymbol { field, ref value } => ApiError::Invalid {
                message: e.to_string(),
                fields: vec![kb::patient::FieldError { field: field.into(), message: format!("unknown `{value}`") }],
            },
            e => ApiError::Internal(e.to_string()),
        }
    }
}

/// Parses and validates a patient document, keeping its original text.
fn parse_document(body: &str) -> Result<(PatientRecord, Box<RawValue>), ApiError> {
    let raw: Box<RawValue> =
        serde_json::from_str(body).map_err(|e| ApiError::BadRequest(format!("malformed JSON: {e}")))?;
    let record: PatientRecord = serde_json::from_str(raw.get()).map_err(|e| ApiError::Invalid {
        message: format!("invalid patient document: {e}"),
        fields: Vec::new(),
    })?;
    record.validate().map_err(|v| ApiError::Invalid { message: v.to_string(), fields: v.errors })?;
    Ok((record, raw))
}

fn record_of(p: &StoredPatient) -> Result<PatientRecord, ApiError> {
    serde_json::from_str(p.record.get()).map_err(|e| ApiError::Internal(format!("stored record unreadable: {e}")))
}

/// Runs solver work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn list_patients(State(s): State<Arc<AppState>>) -> Result<Json<Vec<IndexEntry>>, ApiError> {
    Ok(Json(s.store.list()?))
}

async fn create_patient(State(s): State<Arc<AppState>>, body: String) -> Result<impl IntoResponse, ApiError> {
    let (_, raw) = parse_document(&body)?;
    let p = s.store.create(raw).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": p.id }))))
}

async fn get_patient(State(s): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<StoredPatient>, ApiError> {
    Ok(Json(s.store.get(&id)?))
}

async fn put_patient(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: String,
) -> Result<Json<StoredPatient>, ApiError> {
    let (_, raw) = parse_document(&body)?;
    Ok(Json(s.store.update(&id, raw).await?))
}

#[derive(Deserialize)]
struct LimitParam {
    limit: Option<usize>,
}

async fn recommendations(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<LimitParam>,
) -> Result<Json<Vec<kb::Recommendation>>, ApiError> {
    let record = record_of(&s.store.get(&id)?)?;
    let kb = s.kb();
    let limit = match q.limit {
        None => Some(10),
        Some(0) => None,
        Some(n) => Some(n),
    };
    Ok(Json(blocking(move || Ok(kb::recommend(&record, &kb, limit)?)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfBody {
    treatment: String,
    class: String,
}

async fn whatif(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<WhatIfBody>,
) -> Result<Json<Vec<kb::WhatIf>>, ApiError> {
    let record = record_of(&s.store.get(&id)?)?;
    let kb = s.kb();
    Ok(Json(blocking(move || Ok(kb::whatif(&record, &kb, &body.treatment, &body.class, Some(10))?)).await?))
}

#[derive(Serialize)]
struct KbSummary {
    sources: Vec<String>,
    rules: usize,
}

async fn reload_kb(State(s): State<Arc<AppState>>) -> Result<Json<KbSummary>, ApiError> {
    let paths = s.config.kb_paths.clone();
    let kb = blocking(move || {
        if paths.is_empty() {
            Ok(default_kb())
        } else {
            load_kb(&paths).map_err(|e| ApiError::BadRequest(format!("knowledge base not reloaded: {e}")))
        }
    })
    .await?;
    let summary = KbSummary { sources: kb.sources.clone(), rules: kb.program.rules.len() };
    *s.kb.write().expect("kb lock") = Arc::new(kb);
    Ok(Json(summary))
}

async fn vocabulary() -> Json<kb::ChfVocabulary> {
    Json(kb::ChfVocabulary::get())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/patients", get(list_patients).post(create_patient))
        .route("/patients/:id", get(get_patient).put(put_patient))
        .route("/patients/:id/recommendations", get(recommendations))
        .route("/patients/:id/whatif", post(whatif))
        .route("/kb/reload", post(reload_kb))
        .route("/kb/vocabulary", get(vocabulary))
        .with_state(state)
}

pub async fn serve(config: Config, kb: Kb, addr: &str) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config, kb).map_err(std::io::Error::other)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
