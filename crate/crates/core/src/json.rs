//! Deterministic JSON: object keys sorted at every level, compact output.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect::<Map<_, _>>())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Canonical value tree for `value`.
pub fn to_canonical_value<T: Serialize + ?Sized>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map(sort_keys).map_err(|e| Error::Numeric(format!("serialization failed: {e}")))
}

/// Compact canonical JSON. Non-finite floats serialize as `null`.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(to_canonical_value(value)?.to_string())
}
