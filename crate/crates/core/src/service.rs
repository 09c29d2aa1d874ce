//! HTTP prediction service.
//!
//! - `POST /predict`: multipart form with field `file`, optional query
//!   `threshold`. Replies with exactly `label`, `probability_unsafe`,
//!   `threshold`, `model_id` and `elapsed_ms`.
//! - `GET /health`: `{status, model_id, uptime_s}`, or 503 until a model is loaded.
//! - `POST /admin/reload`: swaps in a model from `{"manifest_path": ...}` (or
//!   the current manifest when the body is empty). Loopback callers only
//!   unless `allow_remote_admin` is set.
//!
//! Errors are `{"error": code, "message": text}`. The model sits behind a
//! read-mostly lock holding an `Arc`; a request keeps the model it started with.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::connect_info::ConnectInfo;
use axum::extract::multipart::MultipartRejection;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Multipart, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Extension, Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;

use crate::classify::{load_model_file, Classifier, ClassifyError};
use crate::Label;

pub const DEFAULT_PORT: u16 = 5000;
pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 16 * 1024 * 1024;
pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub bind_address: SocketAddr,
    pub model_manifest_path: PathBuf,
    /// Overrides the manifest's default threshold.
    pub threshold: Option<f64>,
    pub max_upload_bytes: usize,
    pub request_timeout: Duration,
    /// Static assets served for any path not matched by the API.
    pub static_dir: Option<PathBuf>,
    pub allow_remote_admin: bool,
}

impl ServiceConfig {
    pub fn new(model_manifest_path: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            bind_address: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)),
            model_manifest_path: model_manifest_path.into(),
            threshold: None,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            request_timeout: DEFAULT_REQUEST_TIMEOUT,
            static_dir: None,
            allow_remote_admin: false,
        }
    }

    /// Port 0 is accepted for tests that want an ephemeral port.
    pub fn validate(&self) -> Result<(), ServiceError> {
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(ServiceError::Config(format!("threshold {t} is outside [0, 1]")));
            }
        }
        if self.max_upload_bytes == 0 {
            return Err(ServiceError::Config("max_upload_bytes must be positive".into()));
        }
        if self.request_timeout.is_zero() {
            return Err(ServiceError::Config("request_timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("invalid service config: {0}")]
    Config(String),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("model load failed: {0}")]
    Model(#[from] ClassifyError),
    #[error("server error: {0}")]
    Server(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Config(_) => "invalid_config",
            ServiceError::Bind { .. } => "bind_failed",
            ServiceError::Model(e) => e.code(),
            ServiceError::Server(_) => "server_error",
        }
    }
}

/// Wire format of a successful `/predict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictResponse {
    pub label: Label,
    pub probability_unsafe: f64,
    pub threshold: f64,
    pub model_id: String,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model_id: String,
    pub uptime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReloadResponse {
    pub status: String,
    pub model_id: String,
    pub previous_model_id: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn not_loaded() -> Self {
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "model_not_loaded", "no model is loaded yet")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.code.to_string(), message: self.message })).into_response()
    }
}

/// Shared service state.
pub struct AppState {
    model: RwLock<Option<Arc<Classifier>>>,
    manifest_path: RwLock<PathBuf>,
    threshold: Option<f64>,
    request_timeout: Duration,
    allow_remote_admin: bool,
    started: Instant,
    reload_gate: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> Self {
        AppState {
            model: RwLock::new(None),
            manifest_path: RwLock::new(config.model_manifest_path.clone()),
            threshold: config.threshold,
            request_timeout: config.request_timeout,
            allow_remote_admin: config.allow_remote_admin,
            started: Instant::now(),
            reload_gate: tokio::sync::Mutex::new(()),
        }
    }

    pub fn current(&self) -> Option<Arc<Classifier>> {
        self.model.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    /// Replaces the model; returns the previous one.
    pub fn install(&self, classifier: Classifier) -> Option<Arc<Classifier>> {
        let mut slot = self.model.write().unwrap_or_else(|p| p.into_inner());
        slot.replace(Arc::new(classifier))
    }

    fn manifest_path(&self) -> PathBuf {
        self.manifest_path.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    /// Loads `path` (or the current manifest) off the async runtime and swaps
    /// it in. On failure the old model stays.
    pub async fn reload(&self, path: Option<PathBuf>) -> Result<(Arc<Classifier>, Option<Arc<Classifier>>), ClassifyError> {
        let _gate = self.reload_gate.lock().await;
        let path = path.unwrap_or_else(|| self.manifest_path());
        let load_path = path.clone();
        let classifier = tokio::task::spawn_blocking(move || load_model_file(&load_path))
            .await
            .map_err(|e| ClassifyError::Runtime(e.to_string()))??;
        let previous = self.install(classifier);
        *self.manifest_path.write().unwrap_or_else(|p| p.into_inner()) = path;
        Ok((self.current().expect("just installed"), previous))
    }
}

pub fn router(state: Arc<AppState>, max_upload_bytes: usize, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/predict", post(predict))
        .route("/health", get(health))
        .route("/admin/reload", post(reload))
        .layer(DefaultBodyLimit::max(max_upload_bytes))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") }),
    }
}

#[derive(Debug, Deserialize)]
struct PredictQuery {
    threshold: Option<f64>,
}

async fn predict(
    State(state): State<Arc<AppState>>,
    query: Result<Query<PredictQuery>, QueryRejection>,
    multipart: Result<Multipart, MultipartRejection>,
) -> Result<Json<PredictResponse>, ApiError> {
    let start = Instant::now();
    let Query(query) = query.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_query", e.body_text()))?;
    let model = state.current().ok_or_else(ApiError::not_loaded)?;
    let threshold = query.threshold.or(state.threshold).unwrap_or_else(|| model.default_threshold());
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_threshold", format!("{threshold} is outside [0, 1]")));
    }
    let multipart = multipart.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.body_text()))?;

    let work = async move {
        let bytes = read_file_field(multipart).await?;
        let prediction = tokio::task::spawn_blocking(move || model.predict_bytes(&bytes, threshold))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
            .map_err(|e| match e {
                ClassifyError::UndecodableImage(_) => ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()),
                other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, other.code(), other.to_string()),
            })?;
        Ok::<_, ApiError>(prediction)
    };
    let prediction = tokio::time::timeout(state.request_timeout, work)
        .await
        .map_err(|_| ApiError::new(StatusCode::GATEWAY_TIMEOUT, "timeout", "prediction did not finish in time"))??;

    Ok(Json(PredictResponse {
        label: prediction.label,
        probability_unsafe: prediction.prob_unsafe,
        threshold: prediction.threshold,
        model_id: prediction.model_id,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }))
}

async fn read_file_field(mut multipart: Multipart) -> Result<Bytes, ApiError> {
    let upload_error = |e: axum::extract::multipart::MultipartError| {
        let status = e.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE { "payload_too_large" } else { "invalid_request" };
        ApiError::new(status, code, e.body_text())
    };
    while let Some(field) = multipart.next_field().await.map_err(upload_error)? {
        if field.name() == Some("file") {
            let bytes = field.bytes().await.map_err(upload_error)?;
            if bytes.is_empty() {
                return Err(ApiError::new(StatusCode::BAD_REQUEST, "missing_file", "field \"file\" is empty"));
            }
            return Ok(bytes);
        }
    }
    Err(ApiError::new(StatusCode::BAD_REQUEST, "missing_file", "multipart field \"file\" is required"))
}

async fn health(State(state): State<Arc<AppState>>) -> Result<Json<HealthResponse>, ApiError> {
    let model = state.current().ok_or_else(ApiError::not_loaded)?;
    Ok(Json(HealthResponse {
        status: "ok".into(),
        model_id: model.model_id().to_string(),
        uptime_s: state.started.elapsed().as_secs_f64(),
    }))
}

#[derive(Debug, Default, Deserialize)]
struct ReloadRequest {
    manifest_path: Option<PathBuf>,
}

async fn reload(
    State(state): State<Arc<AppState>>,
    peer: Option<Extension<ConnectInfo<SocketAddr>>>,
    body: Bytes,
) -> Result<Json<ReloadResponse>, ApiError> {
    let local = peer.is_some_and(|Extension(ConnectInfo(addr))| addr.ip().is_loopback());
    if !local && !state.allow_remote_admin {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "forbidden", "reload is only accepted from loopback"));
    }
    let request: ReloadRequest = if body.iter().all(u8::is_ascii_whitespace) {
        ReloadRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string()))?
    };
    let (current, previous) = state
        .reload(request.manifest_path)
        .await
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), format!("reload rejected: {e}")))?;
    Ok(Json(ReloadResponse {
        status: "reloaded".into(),
        model_id: current.model_id().to_string(),
        previous_model_id: previous.map(|p| p.model_id().to_string()),
    }))
}

/// A server running on a background task.
pub struct RunningService {
    pub addr: SocketAddr,
    pub state: Arc<AppState>,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<Result<(), ServiceError>>,
}

impl RunningService {
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    pub async fn shutdown(mut self) -> Result<(), ServiceError> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.task.await.map_err(|e| ServiceError::Server(std::io::Error::other(e)))?
    }

    /// Waits for the server to stop on its own, e.g. after a failed initial load.
    pub async fn wait(self) -> Result<(), ServiceError> {
        self.task.await.map_err(|e| ServiceError::Server(std::io::Error::other(e)))?
    }
}

/// Binds, starts answering (503 until the model is in), then loads the model.
pub async fn spawn(config: ServiceConfig) -> Result<RunningService, ServiceError> {
    config.validate()?;
    let listener = TcpListener::bind(config.bind_address)
        .await
        .map_err(|source| ServiceError::Bind { addr: config.bind_address, source })?;
    let addr = listener.local_addr()?;
    let state = Arc::new(AppState::new(&config));
    let app = router(state.clone(), config.max_upload_bytes, config.static_dir.clone());
    let (tx, rx) = oneshot::channel::<()>();
    let (fail_tx, fail_rx) = oneshot::channel::<ServiceError>();

    let loader = state.clone();
    tokio::spawn(async move {
        if let Err(e) = loader.reload(None).await {
            let _ = fail_tx.send(ServiceError::Model(e));
        }
    });

    let task = tokio::spawn(async move {
        let failed = std::sync::Arc::new(std::sync::Mutex::new(None));
        let failed_slot = failed.clone();
        let stop = async move {
            tokio::select! {
                _ = rx => {}
                Ok(e) = fail_rx => { *failed_slot.lock().unwrap() = Some(e); }
            }
        };
        axum::serve(listener, app.into_make_service_with_connect_info::<SocketAddr>())
            .with_graceful_shutdown(stop)
            .await?;
        let failure = failed.lock().unwrap().take();
        match failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    });
    Ok(RunningService { addr, state, shutdown: Some(tx), task })
}

/// Runs until Ctrl-C or a failed initial model load.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let mut running = spawn(config).await?;
    eprintln!("{{\"event\":\"listening\",\"addr\":\"{}\"}}", running.addr);
    tokio::select! {
        result = &mut running.task => result.map_err(|e| ServiceError::Server(std::io::Error::other(e)))?,
        _ = tokio::signal::ctrl_c() => running.shutdown().await,
    }
}
