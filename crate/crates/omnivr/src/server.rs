//! HTTP view service.
//!
//! ```text
//! GET  /api/meta                                     -> {"width","height","name"}
//! GET  /api/view?yaw&pitch&fov&zoom&w&h&interp       -> image/png
//! POST /api/image   (PNG body)                       -> 201 + new meta
//! ```
//!
//! Angles are radians. The panorama is shared immutably between requests;
//! an upload swaps it under a write lock, so in-flight renders finish on the
//! image they started with.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use omnivr_core::{Error as CoreError, Image, Interpolation};
use rayon::ThreadPool;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::io;
use crate::parallel::run_in;
use crate::view::ViewRequest;

/// Largest accepted upload body.
pub const MAX_UPLOAD_BYTES: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct Panorama {
    pub name: String,
    pub image: Image,
}

impl Panorama {
    pub fn new(name: impl Into<String>, image: Image) -> Result<Self> {
        image.check_erp()?;
        Ok(Self {
            name: name.into(),
            image,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::new(name, io::load_png(path)?)
    }

    fn meta(&self) -> Meta {
        Meta {
            width: self.image.width(),
            height: self.image.height(),
            name: self.name.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Meta {
    width: usize,
    height: usize,
    name: String,
}

pub struct AppState {
    panorama: RwLock<Arc<Panorama>>,
    pool: Option<ThreadPool>,
}

impl AppState {
    pub fn new(panorama: Panorama, pool: Option<ThreadPool>) -> Arc<Self> {
        Arc::new(Self {
            panorama: RwLock::new(Arc::new(panorama)),
            pool,
        })
    }

    fn current(&self) -> Arc<Panorama> {
        self.panorama
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    fn replace(&self, p: Panorama) -> Arc<Panorama> {
        let p = Arc::new(p);
        *self.panorama.write().unwrap_or_else(|e| e.into_inner()) = p.clone();
        p
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::TooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            Error::Core(
                CoreError::InvalidZoom(_)
                | CoreError::InvalidCamera(_)
                | CoreError::NonFiniteAngle(_),
            ) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Core(CoreError::NotEquirectangular { .. } | CoreError::TooSmall { .. }) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            Error::Codec(_) | Error::UnsupportedLayout(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn param<T: std::str::FromStr>(
    q: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, ApiError> {
    match q.get(key) {
        None => Ok(default),
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| bad_request(format!("query parameter {key}={v:?} is malformed"))),
    }
}

/// Parses view query parameters; missing ones take [`ViewRequest::default`].
fn parse_view_query(q: &HashMap<String, String>) -> Result<ViewRequest, ApiError> {
    let d = ViewRequest::default();
    let interp = match q.get("interp") {
        None => d.interp,
        Some(v) => v
            .parse::<Interpolation>()
            .map_err(|_| bad_request(format!("unknown interpolation {v:?}")))?,
    };
    let req = ViewRequest {
        yaw: param(q, "yaw", d.yaw)?,
        pitch: param(q, "pitch", d.pitch)?,
        fov: param(q, "fov", d.fov)?,
        zoom: param(q, "zoom", d.zoom)?,
        width: param(q, "w", d.width)?,
        height: param(q, "h", d.height)?,
        interp,
    };
    if req.width == 0 || req.height == 0 {
        return Err(bad_request("w and h must be positive"));
    }
    Ok(req)
}

async fn meta(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    Json(state.current().meta())
}

async fn view(
    State(state): State<Arc<AppState>>,
    query: Result<Query<HashMap<String, String>>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query.map_err(|e| bad_request(e.body_text()))?;
    let req = parse_view_query(&q)?;
    req.check_size()?;
    let panorama = state.current();
    let t = Instant::now();
    let png = tokio::task::spawn_blocking(move || {
        run_in(state.pool.as_ref(), || req.render_png(&panorama.image))
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    tracing::debug!(?req, ms, "rendered view");
    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    headers.insert(
        "x-render-ms",
        HeaderValue::from_str(&format!("{ms:.3}")).expect("ascii"),
    );
    Ok((StatusCode::OK, headers, png).into_response())
}

async fn upload(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let name = headers
        .get("x-image-name")
        .and_then(|v| v.to_str().ok())
        .unwrap_or("upload")
        .to_owned();
    let panorama = tokio::task::spawn_blocking(move || -> Result<Panorama> {
        Panorama::new(name, io::decode_png(&body)?)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let p = state.replace(panorama);
    tracing::info!(name = %p.name, width = p.image.width(), height = p.image.height(), "panorama replaced");
    Ok((StatusCode::CREATED, Json(p.meta())).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/meta", get(meta))
        .route("/api/view", get(view))
        .route("/api/image", post(upload))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

/// Serves on an already bound listener until the process is interrupted.
pub async fn serve_listener(listener: tokio::net::TcpListener, state: Arc<AppState>) -> Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(Error::Server)
}

pub async fn serve(addr: SocketAddr, panorama: Panorama, pool: Option<ThreadPool>) -> Result<()> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .try_init();
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(Error::Server)?;
    let local = listener.local_addr().map_err(Error::Server)?;
    tracing::info!(
        %local,
        name = %panorama.name,
        width = panorama.image.width(),
        height = panorama.image.height(),
        "serving"
    );
    serve_listener(listener, AppState::new(panorama, pool)).await
}
