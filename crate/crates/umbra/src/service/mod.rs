//! Session-oriented HTTP API for the interactive stroke, refine and remove
//! loop.

mod error;
mod session;

use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::multipart::MultipartRejection;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Semaphore;
use umbra_core::detect::{detect_mask, StrokeSet};
use umbra_core::imgcore::io::{decode_image, encode_mask_png, encode_png};
use umbra_core::{remove_shadow, ParamVector, RemovalOptions, UmbraError};

use crate::artifacts::Artifact;
use crate::cli::ServeArgs;

pub use error::ApiError;
pub use session::{
    EncodedArtifacts, RemovalKey, Session, SessionState, SessionStore, StoredRemoval,
};

pub const DEFAULT_MAX_SESSIONS: usize = 64;
pub const IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);
pub const MAX_UPLOAD_BYTES: usize = 20 * 1024 * 1024;

/// Artifact kinds served after a removal, with the encoder behind each.
const REMOVAL_ARTIFACTS: [(&str, Artifact); 6] = [
    ("result", Artifact::Result),
    ("fusion", Artifact::Fusion),
    ("sparse", Artifact::Sparse),
    ("dense", Artifact::Dense),
    ("strip", Artifact::Strip),
    ("aligned", Artifact::Aligned),
];

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub max_sessions: usize,
    pub idle: Duration,
    pub params: ParamVector,
    /// Removals allowed to run at once.
    pub workers: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_sessions: DEFAULT_MAX_SESSIONS,
            idle: IDLE_TIMEOUT,
            params: ParamVector::default(),
            workers: std::thread::available_parallelism().map_or(2, |n| n.get()),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<SessionStore>,
    workers: Arc<Semaphore>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            sessions: Arc::new(SessionStore::new(config.max_sessions, config.idle)),
            workers: Arc::new(Semaphore::new(config.workers.max(1))),
            config: Arc::new(config),
        }
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }

    fn session(&self, id: &str) -> Result<session::SharedSession, ApiError> {
        self.sessions
            .get(id)
            .ok_or_else(|| ApiError::not_found(format!("no session {id}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_status).delete(delete_session))
        .route("/sessions/{id}/strokes", post(add_strokes).get(get_strokes))
        .route("/sessions/{id}/removal", post(run_removal))
        .route("/sessions/{id}/artifacts/{kind}", get(get_artifact))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        // Multipart framing adds a little on top of the image itself.
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES + 64 * 1024))
        .with_state(state)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> T + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "internal",
            format!("worker failed: {e}"),
        )
    })
}

#[derive(Serialize)]
struct Created {
    id: String,
    width: usize,
    height: usize,
}

async fn create_session(
    State(state): State<AppState>,
    multipart: Result<Multipart, MultipartRejection>,
) -> Result<Response, ApiError> {
    let mut multipart = multipart
        .map_err(|e| ApiError::bad_request(format!("expected a multipart upload: {e}")))?;
    let mut bytes: Option<Bytes> = None;
    while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
        let is_image = field.name() == Some("image") || field.file_name().is_some();
        if is_image && bytes.is_none() {
            bytes = Some(field.bytes().await.map_err(multipart_error)?);
        }
    }
    let bytes = bytes.ok_or_else(|| ApiError::bad_request("multipart body has no image field"))?;
    if bytes.len() > MAX_UPLOAD_BYTES {
        return Err(too_large());
    }
    let session = blocking(move || -> Result<Session, ApiError> {
        let image = decode_image::<f64>(&bytes)?;
        let png = encode_png(&image)?;
        Ok(Session::new(image, png))
    })
    .await??;
    let (width, height) = (session.image.width(), session.image.height());
    let id = uuid::Uuid::new_v4().simple().to_string();
    state.sessions.insert(id.clone(), session);
    Ok((StatusCode::CREATED, Json(Created { id, width, height })).into_response())
}

fn too_large() -> ApiError {
    ApiError::new(
        StatusCode::PAYLOAD_TOO_LARGE,
        "too_large",
        format!("uploads are limited to {MAX_UPLOAD_BYTES} bytes"),
    )
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        too_large()
    } else {
        ApiError::bad_request(format!("malformed multipart body: {}", e.body_text()))
    }
}

async fn session_status(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let shared = state.session(&id)?;
    let s = shared.lock().await;
    Ok(Json(json!({
        "id": id,
        "state": s.state(),
        "width": s.image.width(),
        "height": s.image.height(),
        "stroke_count": s.strokes.strokes.len(),
        "revision": s.strokes_revision,
        "shadow_pixel_count": s.mask.as_ref().map(|m| m.count()),
        "idle_seconds": s.updated.elapsed().as_secs(),
        "age_seconds": s.created.elapsed().as_secs(),
    }))
    .into_response())
}

async fn delete_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    if state.sessions.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found(format!("no session {id}")))
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    if body.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(ApiError::bad_request("request body is empty"));
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON: {e}")))
}

#[derive(Serialize)]
struct StrokesAccepted {
    mask_url: String,
    shadow_pixel_count: usize,
    stroke_count: usize,
    revision: u64,
}

async fn add_strokes(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<StrokesAccepted>, ApiError> {
    let delta: StrokeSet = parse_json(&body)?;
    if delta.strokes.is_empty() {
        return Err(ApiError::bad_request("stroke delta is empty"));
    }
    let shared = state.session(&id)?;
    let mut s = shared.lock().await;
    let mut union = s.strokes.clone();
    union.extend(delta);
    let image = s.image.clone();
    let h1 = state.config.params.h1;
    let candidate = union.clone();
    let mask = match blocking(move || detect_mask(&image, &candidate, h1)).await? {
        Ok(mask) => mask,
        // Until both labels are present the strokes are kept, so that a
        // pair drawn one stroke at a time still reaches detection.
        Err(e @ UmbraError::InsufficientStrokes(_)) if s.mask.is_none() => {
            s.strokes = union;
            s.strokes_revision += 1;
            s.touch();
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    let png = encode_mask_png(&mask)?;
    s.strokes = union;
    s.strokes_revision += 1;
    s.mask = Some(mask);
    s.mask_png = Some(Arc::new(png));
    s.touch();
    Ok(Json(StrokesAccepted {
        mask_url: format!("/sessions/{id}/artifacts/mask"),
        shadow_pixel_count: s.mask.as_ref().map_or(0, |m| m.count()),
        stroke_count: s.strokes.strokes.len(),
        revision: s.strokes_revision,
    }))
}

async fn get_strokes(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<StrokeSet>, ApiError> {
    let shared = state.session(&id)?;
    let s = shared.lock().await;
    Ok(Json(s.strokes.clone()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RemovalRequest {
    #[serde(default)]
    no_color_correct: bool,
    params: Option<ParamVector>,
}

#[derive(Serialize)]
struct RemovalDone {
    result_url: String,
    cached: bool,
    state: SessionState,
}

async fn run_removal(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<RemovalDone>, ApiError> {
    let request: RemovalRequest = if body.iter().all(|b| b.is_ascii_whitespace()) {
        RemovalRequest::default()
    } else {
        parse_json(&body)?
    };
    let params = request.params.unwrap_or(state.config.params);
    params.validate()?;
    let shared = state.session(&id)?;
    let result_url = format!("/sessions/{id}/artifacts/result");

    // Snapshot under the session lock, then compute without holding it so
    // that stroke updates stay responsive.
    let (image, strokes, key) = {
        let s = shared.lock().await;
        if s.mask.is_none() {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "not_detected",
                "add shadow and lit strokes before requesting a removal",
            ));
        }
        let key = RemovalKey {
            strokes_revision: s.strokes_revision,
            color_correct: !request.no_color_correct,
            params,
        };
        if s.removal.as_ref().is_some_and(|r| r.key == key) {
            return Ok(Json(RemovalDone {
                result_url,
                cached: true,
                state: s.state(),
            }));
        }
        (s.image.clone(), s.strokes.clone(), key)
    };

    let _permit = state.workers.acquire().await.map_err(|_| {
        ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "shutting_down",
            "worker pool closed",
        )
    })?;
    let artifacts = blocking(move || -> Result<EncodedArtifacts, ApiError> {
        let options = RemovalOptions {
            color_correct: key.color_correct,
            ..RemovalOptions::default()
        };
        let removal = remove_shadow(&image, &strokes, &key.params, &options)?;
        REMOVAL_ARTIFACTS
            .iter()
            .map(|(name, a)| Ok((*name, Arc::new(a.encode(&removal)?))))
            .collect()
    })
    .await??;

    let mut s = shared.lock().await;
    s.removal = Some(StoredRemoval { key, artifacts });
    s.touch();
    Ok(Json(RemovalDone {
        result_url,
        cached: false,
        state: s.state(),
    }))
}

async fn get_artifact(
    State(state): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let shared = state.session(&id)?;
    let s = shared.lock().await;
    let bytes = match kind.as_str() {
        "original" => Some(s.original_png.clone()),
        "mask" => s.mask_png.clone(),
        other => {
            if !REMOVAL_ARTIFACTS.iter().any(|(name, _)| *name == other) {
                return Err(ApiError::not_found(format!(
                    "unknown artifact kind {other}"
                )));
            }
            s.current_removal()
                .and_then(|r| r.artifacts.iter().find(|(name, _)| *name == other))
                .map(|(_, b)| b.clone())
        }
    };
    let bytes = bytes.ok_or_else(|| {
        ApiError::not_found(format!("{kind} is not available in state {:?}", s.state()))
    })?;
    let etag = format!("\"{id}-{}-{kind}\"", s.version);
    let cache = [
        (header::ETAG, etag.clone()),
        (header::CACHE_CONTROL, "no-cache".to_string()),
    ];
    let matches = headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == etag || t.trim() == "*"));
    if matches {
        return Ok((StatusCode::NOT_MODIFIED, cache).into_response());
    }
    Ok((
        StatusCode::OK,
        [(header::CONTENT_TYPE, "image/png".to_string())],
        cache,
        bytes.as_ref().clone(),
    )
        .into_response())
}

/// Config from CLI flags and the environment, then serve until Ctrl-C.
pub fn serve_blocking(args: &ServeArgs) -> anyhow::Result<()> {
    let params = match &args.params {
        Some(p) => ParamVector::load(p)?,
        None => ParamVector::default(),
    };
    let config = ServiceConfig {
        max_sessions: args.max_sessions,
        params,
        ..ServiceConfig::default()
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(serve(config, args.port))
}

pub async fn serve(config: ServiceConfig, port: u16) -> anyhow::Result<()> {
    let state = AppState::new(config);
    let sweeper = state.sessions.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.evict_idle();
        }
    });
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("umbra service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
