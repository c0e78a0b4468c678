use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::Response;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sisx_core::density::column_density;
use sisx_core::regression::{correlation_matrix, fit_model, scatter3d_data, FitReport, ModelSpec};
use sisx_core::sampling::{draw_sample, sample_size_detail, SampleSizeParams};
use sisx_core::store::schema::{ColumnSchema, AGE, TOTAL_AFFILIATES};
use sisx_core::store::{
    aggregate_by, filter, ingest, region_totals, summarize, CleaningRules, Column, FilterSpec, IngestReport, Rejection,
};

use crate::error::ApiError;
use crate::registry::Entry;
use crate::{canonical_response, AppState};

pub const REJECTION_SAMPLE: usize = 20;
pub const MAX_PAGE: usize = 1000;
pub const DEFAULT_SCATTER_POINTS: usize = 5000;

type ApiResult = Result<Response, ApiError>;

fn ok<T: Serialize>(value: &T) -> ApiResult {
    Ok(canonical_response(StatusCode::OK, value))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", format!("worker failed: {e}")))
}

fn entry(state: &AppState, id: &str) -> Result<Arc<Entry>, ApiError> {
    state.registry.get(id).ok_or_else(|| ApiError::not_found(id))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::invalid(format!("bad query string: {}", e.body_text())))
}

fn json_body<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::invalid(format!("bad JSON body: {e}")))
}

fn flag(raw: Option<&str>, name: &str) -> Result<bool, ApiError> {
    match raw.map(str::to_ascii_lowercase).as_deref() {
        None | Some("") | Some("false") | Some("0") => Ok(false),
        Some("true") | Some("1") => Ok(true),
        Some(other) => Err(ApiError::invalid(format!("{name} must be true or false, got {other:?}"))),
    }
}

fn number<T: std::str::FromStr>(raw: Option<&str>, name: &str) -> Result<Option<T>, ApiError> {
    raw.filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| ApiError::invalid(format!("{name}: cannot parse {s:?}"))))
        .transpose()
}

pub async fn health() -> Response {
    canonical_response(StatusCode::OK, &json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionSummary {
    pub reasons: BTreeMap<String, usize>,
    /// The first few rejections in row order.
    pub sample: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadResponse {
    pub id: String,
    pub created: bool,
    pub rows_in: usize,
    pub rows_kept: usize,
    pub rows_rejected: usize,
    pub rejections: RejectionSummary,
}

impl UploadResponse {
    pub fn new(id: &str, created: bool, report: &IngestReport) -> Self {
        let sample =
            report.parse.rejections.iter().chain(&report.clean.rejections).take(REJECTION_SAMPLE).cloned().collect();
        Self {
            id: id.to_string(),
            created,
            rows_in: report.rows_in,
            rows_kept: report.rows_kept,
            rows_rejected: report.rows_rejected(),
            rejections: RejectionSummary { reasons: report.reasons(), sample },
        }
    }
}

pub async fn upload(State(state): State<AppState>, headers: HeaderMap, body: Body) -> ApiResult {
    let limit = state.max_upload_bytes;
    let too_large = || {
        ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "payload_too_large", format!("upload exceeds {limit} bytes"))
            .with_detail(json!({ "max_upload_bytes": limit }))
    };
    let declared = headers.get(header::CONTENT_LENGTH).and_then(|v| v.to_str().ok()?.parse::<usize>().ok());
    if declared.is_some_and(|n| n > limit) {
        return Err(too_large());
    }
    let bytes = axum::body::to_bytes(body, limit).await.map_err(|_| too_large())?;
    if bytes.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty_body", "upload body is empty"));
    }
    let (dataset, report) = blocking(move || ingest(&bytes, &ColumnSchema::sis_default(), &CleaningRules::default()))
        .await?
        .map_err(|e| ApiError::upload(&e))?;
    let registry = Arc::clone(&state.registry);
    let response = blocking(move || {
        let (entry, created) = registry.insert(dataset, Some(report.clone()), None)?;
        Ok::<_, ApiError>(UploadResponse::new(&entry.id, created, &report))
    })
    .await??;
    let status = if response.created { StatusCode::CREATED } else { StatusCode::OK };
    Ok(canonical_response(status, &response))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub name: String,
    pub kind: sisx_core::store::ColumnKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub id: String,
    pub parent: Option<String>,
    pub row_count: usize,
    pub total_affiliates: u64,
    pub columns: Vec<ColumnInfo>,
}

impl DatasetInfo {
    pub fn new(id: &str, parent: Option<&str>, dataset: &sisx_core::Dataset) -> Self {
        let columns = dataset
            .columns()
            .map(|(schema, column)| ColumnInfo {
                name: schema.name.clone(),
                kind: column.kind(),
                levels: match column {
                    Column::Categorical(c) => Some(c.levels().len()),
                    Column::Integer(_) => None,
                },
            })
            .collect();
        Self {
            id: id.to_string(),
            parent: parent.map(str::to_string),
            row_count: dataset.row_count(),
            total_affiliates: dataset.total_affiliates(),
            columns,
        }
    }
}

pub async fn info(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let e = entry(&state, &id)?;
    ok(&DatasetInfo::new(&e.id, e.parent.as_deref(), &e.dataset))
}

#[derive(Debug, Default, Deserialize)]
pub struct PageQuery {
    offset: Option<String>,
    limit: Option<String>,
}

/// One page of rows, integers as numbers and categoricals as strings.
pub fn rows_page(dataset: &sisx_core::Dataset, offset: usize, limit: usize) -> Value {
    let total = dataset.row_count();
    let start = offset.min(total);
    let end = start.saturating_add(limit).min(total);
    let cols: Vec<&Column> = dataset.columns().map(|(_, c)| c).collect();
    let rows: Vec<Value> = (start..end)
        .map(|r| {
            Value::Array(
                cols.iter()
                    .map(|c| match c {
                        Column::Categorical(cat) => Value::from(cat.value(r)),
                        Column::Integer(v) => Value::from(v[r]),
                    })
                    .collect(),
            )
        })
        .collect();
    json!({
        "columns": dataset.column_names().collect::<Vec<_>>(),
        "offset": start,
        "limit": limit,
        "total": total,
        "rows": rows,
    })
}

pub async fn rows(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<PageQuery>, QueryRejection>,
) -> ApiResult {
    let q = query(q)?;
    let offset = number(q.offset.as_deref(), "offset")?.unwrap_or(0);
    let limit = number(q.limit.as_deref(), "limit")?.unwrap_or(100);
    if limit == 0 || limit > MAX_PAGE {
        return Err(ApiError::invalid(format!("limit must be in 1..={MAX_PAGE}")));
    }
    let e = entry(&state, &id)?;
    ok(&rows_page(&e.dataset, offset, limit))
}

pub async fn summary(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let e = entry(&state, &id)?;
    let report = blocking(move || summarize(&e.dataset)).await?;
    ok(&report)
}

#[derive(Debug, Default, Deserialize)]
pub struct VariableQuery {
    variable: Option<String>,
    weighted: Option<String>,
    bandwidth: Option<String>,
}

fn required_variable(q: &VariableQuery) -> Result<String, ApiError> {
    q.variable
        .clone()
        .filter(|v| !v.is_empty())
        .ok_or_else(|| ApiError::invalid("query parameter variable is required"))
}

/// Body of the distribution endpoint: the resolved column name and its levels.
pub fn distribution_body(dataset: &sisx_core::Dataset, variable: &str) -> sisx_core::Result<Value> {
    let levels = aggregate_by(dataset, variable)?;
    let name = dataset.resolve(variable).unwrap_or(variable).to_string();
    Ok(json!({ "variable": name, "levels": levels }))
}

pub async fn distribution(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<VariableQuery>, QueryRejection>,
) -> ApiResult {
    let variable = required_variable(&query(q)?)?;
    let e = entry(&state, &id)?;
    let body = blocking(move || distribution_body(&e.dataset, &variable)).await?.map_err(|e| ApiError::engine(&e))?;
    ok(&body)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedResponse {
    pub id: String,
    pub parent: Option<String>,
    pub created: bool,
    pub row_count: usize,
}

async fn register_derived(state: &AppState, parent: &str, dataset: sisx_core::Dataset) -> ApiResult {
    let registry = Arc::clone(&state.registry);
    let parent = parent.to_string();
    let (entry, created) = blocking(move || registry.insert(dataset, None, Some(parent))).await??;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    let body = DerivedResponse {
        id: entry.id.clone(),
        parent: entry.parent.clone(),
        created,
        row_count: entry.dataset.row_count(),
    };
    Ok(canonical_response(status, &body))
}

pub async fn filter_dataset(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let spec: FilterSpec = json_body(&body)?;
    let e = entry(&state, &id)?;
    let parent = e.id.clone();
    let derived = blocking(move || filter(&e.dataset, &spec)).await?.map_err(|e| ApiError::engine(&e))?;
    register_derived(&state, &parent, derived).await
}

#[derive(Debug, Default, Deserialize)]
pub struct SampleRequest {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

pub async fn sample_dataset(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: SampleRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::invalid(format!("bad JSON body: {e}")))?;
    let e = entry(&state, &id)?;
    let parent = e.id.clone();
    let derived =
        blocking(move || draw_sample(&e.dataset, req.n, req.seed)).await?.map_err(|e| ApiError::engine(&e))?;
    register_derived(&state, &parent, derived).await
}

pub async fn regions(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let e = entry(&state, &id)?;
    let centroids = Arc::clone(&state.centroids);
    let report = blocking(move || region_totals(&e.dataset, &centroids)).await?.map_err(|e| ApiError::engine(&e))?;
    ok(&report)
}

#[derive(Debug, Default, Deserialize)]
pub struct VerboseQuery {
    verbose: Option<String>,
}

/// Fits `spec` and renders the report the regression endpoint returns.
pub fn regression_report(
    dataset: &sisx_core::Dataset,
    spec: &ModelSpec,
    verbose: bool,
) -> sisx_core::Result<FitReport> {
    let fit = fit_model(dataset, spec)?;
    let response = dataset.resolve(&spec.response).unwrap_or(&spec.response).to_string();
    FitReport::new(&fit, &response, verbose)
}

pub async fn regression(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<VerboseQuery>, QueryRejection>,
    body: Bytes,
) -> ApiResult {
    let verbose = flag(query(q)?.verbose.as_deref(), "verbose")?;
    let spec: ModelSpec = json_body(&body)?;
    let e = entry(&state, &id)?;
    let report =
        blocking(move || regression_report(&e.dataset, &spec, verbose)).await?.map_err(|e| ApiError::engine(&e))?;
    ok(&report)
}

pub async fn density(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<VariableQuery>, QueryRejection>,
) -> ApiResult {
    let q = query(q)?;
    let variable = required_variable(&q)?;
    let weighted = flag(q.weighted.as_deref(), "weighted")?;
    let bandwidth: Option<f64> = number(q.bandwidth.as_deref(), "bandwidth")?;
    let e = entry(&state, &id)?;
    let est = blocking(move || column_density(&e.dataset, &variable, weighted, bandwidth))
        .await?
        .map_err(|e| ApiError::engine(&e))?;
    ok(&est)
}

#[derive(Debug, Default, Deserialize)]
pub struct CorrelationQuery {
    variables: Option<String>,
}

pub async fn correlation(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<CorrelationQuery>, QueryRejection>,
) -> ApiResult {
    let variables: Vec<String> = match query(q)?.variables.filter(|v| !v.is_empty()) {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => vec![AGE.to_string(), TOTAL_AFFILIATES.to_string()],
    };
    let e = entry(&state, &id)?;
    let m = blocking(move || correlation_matrix(&e.dataset, &variables)).await?.map_err(|e| ApiError::engine(&e))?;
    ok(&m)
}

#[derive(Debug, Default, Deserialize)]
pub struct ScatterQuery {
    x: Option<String>,
    y: Option<String>,
    z: Option<String>,
    max_points: Option<String>,
    seed: Option<String>,
}

pub async fn scatter3d(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<ScatterQuery>, QueryRejection>,
) -> ApiResult {
    let q = query(q)?;
    let x = q.x.unwrap_or_else(|| AGE.to_string());
    let y = q.y.unwrap_or_else(|| sisx_core::store::schema::INSURANCE_PLAN.to_string());
    let z = q.z.unwrap_or_else(|| TOTAL_AFFILIATES.to_string());
    let max_points = number(q.max_points.as_deref(), "max_points")?.unwrap_or(DEFAULT_SCATTER_POINTS);
    let seed = number(q.seed.as_deref(), "seed")?.unwrap_or(0);
    let e = entry(&state, &id)?;
    let s = blocking(move || scatter3d_data(&e.dataset, [&x, &y, &z], max_points, seed))
        .await?
        .map_err(|e| ApiError::engine(&e))?;
    ok(&s)
}

pub async fn sample_size(body: Bytes) -> ApiResult {
    let params: SampleSizeParams =
        serde_json::from_slice(&body).map_err(|e| ApiError::invalid(format!("bad JSON body: {e}")))?;
    let n = sample_size_detail(&params).map_err(|e| ApiError::engine(&e))?;
    ok(&n)
}

pub async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no_route", "no such endpoint")
}
