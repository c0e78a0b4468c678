#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use sisx_core::store::schema::ColumnSchema;
use sisx_core::store::{ingest, CentroidTable, CleaningRules};
use sisx_core::synth::{synthetic_csv, SynthModel};
use sisx_core::Dataset;
use sisx_service::{router, AppState, Config};
use tower::ServiceExt;

pub const SMALL_CSV: &str = "DEPARTAMENTO;EDAD;NACIONAL_EXTRANJERO;AMBITO_INEI;PLAN_DE_SEGURO;TOTAL_AFILIADOS\n\
PUNO;34;NACIONAL;RURAL;SIS GRATUITO;120\n\
LIMA;51;NACIONAL;URBANO;SIS PARA TODOS;300\n\
CUSCO;8;EXTRANJERO;URBANO;SIS INDEPENDIENTE;15\n";

pub fn app_with(config: Config) -> Router {
    router(AppState::new(&config, CentroidTable::peru_departments()), None)
}

pub fn app() -> Router {
    app_with(Config::default())
}

pub fn fixture(rows: usize, seed: u64) -> Vec<u8> {
    synthetic_csv(rows, seed, &SynthModel::default())
}

pub fn library_dataset(bytes: &[u8]) -> Dataset {
    ingest(bytes, &ColumnSchema::sis_default(), &CleaningRules::default()).unwrap().0
}

pub async fn call(app: &Router, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, b) = call(app, Method::GET, uri, Body::empty()).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

pub async fn post(app: &Router, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let (s, b) = call(app, Method::POST, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

pub async fn upload(app: &Router, bytes: &[u8]) -> String {
    let (status, body) = post(app, "/datasets", bytes.to_vec()).await;
    assert!(status.is_success(), "{status}: {body}");
    body["id"].as_str().unwrap().to_string()
}

pub fn canonical<T: serde::Serialize>(v: &T) -> Vec<u8> {
    sisx_core::json::to_canonical_string(v).unwrap().into_bytes()
}
