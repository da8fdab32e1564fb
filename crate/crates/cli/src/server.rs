//! JSON-over-HTTP service: `GET /health`, `GET /datasets`, `POST /compute`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use andrews_core::{Dataset, LabelSpec};
use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

use crate::compute::{self, AppError, ComputeRequest, SpectrumMemo};

/// Optional `manifest.json` in the datasets directory, mapping dataset ids to
/// label specs, e.g. `{"diabetes": {"label": {"quartile": "target"}}}`.
#[derive(Debug, Default, Deserialize)]
struct Manifest(BTreeMap<String, ManifestEntry>);

#[derive(Debug, Default, Deserialize)]
struct ManifestEntry {
    #[serde(default)]
    label: Option<LabelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub id: String,
    pub d: usize,
    pub n: usize,
    pub labels: Vec<String>,
}

pub struct AppState {
    datasets: BTreeMap<String, Arc<Dataset>>,
    memo: SpectrumMemo,
    allow_upload: bool,
}

impl AppState {
    pub fn new(datasets: BTreeMap<String, Arc<Dataset>>, allow_upload: bool) -> Self {
        AppState { datasets, memo: SpectrumMemo::default(), allow_upload }
    }

    /// Loads every `*.csv` in `dir`; the file stem is the dataset id.
    pub fn from_dir(dir: &Path, allow_upload: bool) -> Result<Self, AppError> {
        let manifest_path = dir.join("manifest.json");
        let manifest: Manifest = match std::fs::read(&manifest_path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| AppError::Input(format!("{}: {e}", manifest_path.display())))?,
            Err(_) => Manifest::default(),
        };
        let entries =
            std::fs::read_dir(dir).map_err(|e| AppError::Input(format!("cannot read {}: {e}", dir.display())))?;
        let mut datasets = BTreeMap::new();
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            let label = manifest.0.get(&id).and_then(|m| m.label.as_ref());
            let ds = compute::load_dataset(&path, label).map_err(|e| AppError::Input(format!("{id}: {e}")))?;
            datasets.insert(id, Arc::new(ds));
        }
        Ok(AppState::new(datasets, allow_upload))
    }

    pub fn memo(&self) -> &SpectrumMemo {
        &self.memo
    }

    pub fn dataset_infos(&self) -> Vec<DatasetInfo> {
        self.datasets
            .iter()
            .map(|(id, ds)| DatasetInfo { id: id.clone(), d: ds.dim(), n: ds.len(), labels: ds.distinct_labels() })
            .collect()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/datasets", get(datasets))
        .route("/compute", post(compute_handler))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(state: AppState, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state))).await
}

async fn health() -> &'static str {
    "ok"
}

async fn datasets(State(state): State<Arc<AppState>>) -> Response {
    json_response(StatusCode::OK, serde_json::to_vec(&state.dataset_infos()).expect("serializes"))
}

async fn compute_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: ComputeRequest = match serde_json::from_slice(&body) {
        Ok(req) => req,
        Err(e) => return error_response(&AppError::Input(format!("malformed request: {e}"))),
    };
    let result = tokio::task::spawn_blocking(move || run(&state, &req)).await;
    match result {
        Ok(Ok(bytes)) => json_response(StatusCode::OK, bytes),
        Ok(Err(e)) => error_response(&e),
        Err(e) => error_response(&AppError::Internal(e.to_string())),
    }
}

fn run(state: &AppState, req: &ComputeRequest) -> Result<Vec<u8>, AppError> {
    req.validate()?;
    let uploaded;
    let ds: &Dataset = match (&req.csv, state.datasets.get(&req.dataset)) {
        (Some(_), _) if !state.allow_upload => {
            return Err(AppError::Input("inline datasets are disabled on this server".into()));
        }
        (Some(text), _) => {
            uploaded = compute::parse_dataset(text.as_bytes(), req.label.as_ref())?;
            &uploaded
        }
        (None, Some(ds)) if req.label.is_none() => ds,
        (None, Some(_)) => {
            return Err(AppError::Input("label overrides are not supported for served datasets".into()));
        }
        (None, None) => return Err(AppError::NotFound(req.dataset.clone())),
    };
    let computed = compute::compute(ds, &req.dataset, req, &state.memo)?;
    Ok(compute::to_json(&computed.response))
}

pub fn status_of(e: &AppError) -> StatusCode {
    match e {
        AppError::Input(_) => StatusCode::BAD_REQUEST,
        AppError::NotFound(_) => StatusCode::NOT_FOUND,
        AppError::Numerical { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        AppError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn error_response(e: &AppError) -> Response {
    let body = match e {
        AppError::Numerical { report, .. } => serde_json::json!({ "error": e.to_string(), "report": report }),
        _ => serde_json::json!({ "error": e.to_string() }),
    };
    json_response(status_of(e), serde_json::to_vec(&body).expect("serializes"))
}

fn json_response(status: StatusCode, body: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}
