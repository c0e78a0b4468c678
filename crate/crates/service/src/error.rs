use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde_json::{json, Value};
use sisx_core::Error;

use crate::registry::RegistryError;

/// Error body `{code, message, detail}` with its HTTP status.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, code: code.to_string(), message: message.into(), detail: Value::Null }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no dataset with id {id}"))
            .with_detail(json!({ "id": id }))
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", message)
    }

    /// An upload rejected by parsing or schema checks.
    pub fn upload(err: &Error) -> Self {
        Self::new(StatusCode::BAD_REQUEST, err.code(), err.to_string()).with_detail(engine_detail(err))
    }

    /// A well-formed request the engine could not satisfy.
    pub fn engine(err: &Error) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, err.code(), err.to_string()).with_detail(engine_detail(err))
    }

    pub fn body(&self) -> Value {
        json!({ "code": self.code, "message": self.message, "detail": self.detail })
    }
}

/// Machine-readable fields of an engine error.
pub fn engine_detail(err: &Error) -> Value {
    let mut detail = json!({ "engine_error": err.code() });
    let extra = match err {
        Error::MissingColumn { column } => json!({ "column": column }),
        Error::EmptyInput { rows_in } => json!({ "rows_in": rows_in }),
        Error::Encoding { offset } => json!({ "offset": offset }),
        Error::Bounds { requested, available } => json!({ "requested": requested, "available": available }),
        Error::DegeneratePredictor { column, reason } => json!({ "column": column, "reason": reason }),
        Error::InsufficientDf { n, rank } => json!({ "n": n, "rank": rank }),
        Error::UnseenLevel { column, level } => json!({ "column": column, "level": level }),
        _ => Value::Null,
    };
    if let (Value::Object(d), Value::Object(e)) = (&mut detail, extra) {
        d.extend(e);
    }
    detail
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::TooLarge { rows, max_rows } => Self::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "too_many_rows",
                format!("dataset has {rows} rows; the registry holds at most {max_rows}"),
            )
            .with_detail(json!({ "rows": rows, "max_rows": max_rows })),
            RegistryError::Busy => Self::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "registry_busy",
                "registry is full and every dataset is in use; retry later",
            ),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        crate::canonical_response(self.status, &self.body())
    }
}
