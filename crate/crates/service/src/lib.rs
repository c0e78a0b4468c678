//! HTTP JSON service over `sisx-core`.
//!
//! Every analysis endpoint is a thin delegation to one library call, and
//! every body is canonical JSON (sorted keys, compact), so identical inputs
//! give byte-identical responses.

pub mod config;
pub mod error;
pub mod handlers;
pub mod registry;

use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use sisx_core::store::CentroidTable;
use tower_http::services::ServeDir;

pub use config::Config;
pub use error::ApiError;
pub use registry::{Entry, Registry, RegistryError};

#[derive(Debug, Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
    pub centroids: Arc<CentroidTable>,
    pub max_upload_bytes: usize,
}

impl AppState {
    pub fn new(config: &Config, centroids: CentroidTable) -> Self {
        Self {
            registry: Arc::new(Registry::new(config.max_datasets, config.max_rows)),
            centroids: Arc::new(centroids),
            max_upload_bytes: config.max_upload_bytes,
        }
    }
}

/// Serializes `value` canonically with the given status.
pub fn canonical_response<T: Serialize + ?Sized>(status: StatusCode, value: &T) -> Response {
    match sisx_core::json::to_canonical_string(value) {
        Ok(body) => {
            let mut resp = (status, body).into_response();
            resp.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            resp
        }
        Err(e) => {
            let body =
                format!(r#"{{"code":"internal","detail":null,"message":"{}"}}"#, e.to_string().replace('"', "'"));
            (StatusCode::INTERNAL_SERVER_ERROR, [(header::CONTENT_TYPE, "application/json")], body).into_response()
        }
    }
}

pub fn router(state: AppState, ui_dir: Option<&std::path::Path>) -> Router {
    use handlers::*;
    let mut app = Router::new()
        .route("/health", get(health))
        .route("/sample-size", post(sample_size))
        .route("/datasets", post(upload).layer(DefaultBodyLimit::disable()))
        .route("/datasets/{id}", get(info))
        .route("/datasets/{id}/rows", get(rows))
        .route("/datasets/{id}/summary", get(summary))
        .route("/datasets/{id}/distribution", get(distribution))
        .route("/datasets/{id}/filter", post(filter_dataset))
        .route("/datasets/{id}/sample", post(sample_dataset))
        .route("/datasets/{id}/regions", get(regions))
        .route("/datasets/{id}/regression", post(regression))
        .route("/datasets/{id}/density", get(density))
        .route("/datasets/{id}/correlation", get(correlation))
        .route("/datasets/{id}/scatter3d", get(scatter3d));
    if let Some(dir) = ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    app.fallback(fallback).with_state(state)
}

/// Loads the centroid table named by the config, or the built-in one.
pub fn load_centroids(config: &Config) -> std::io::Result<CentroidTable> {
    match &config.centroids {
        None => Ok(CentroidTable::peru_departments()),
        Some(path) => {
            let bytes = std::fs::read(path)?;
            CentroidTable::from_json(&bytes)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))
        }
    }
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let state = AppState::new(&config, load_centroids(&config)?);
    let app = router(state, config.ui_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(config.addr()).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
