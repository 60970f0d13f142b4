//! BIM models as pretty-printed JSON with a schema version.

use crate::error::{Error, Result};
use crate::model::{BimModel, SCHEMA_VERSION};

pub fn write_bim_json(model: &BimModel) -> String {
    let mut s = serde_json::to_string_pretty(model).expect("model serializes to JSON");
    s.push('\n');
    s
}

/// Parses and validates a model. The schema version is checked before the
/// rest of the document is interpreted.
pub fn read_bim_json(text: &str) -> Result<BimModel> {
    let loc = |e: &serde_json::Error| format!("line {}, column {}", e.line(), e.column());
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse(loc(&e), e.to_string()))?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::parse("schema_version", "missing or not an unsigned integer"))?;
    if found != SCHEMA_VERSION as u64 {
        return Err(Error::SchemaVersionMismatch {
            found: found.min(u32::MAX as u64) as u32,
            expected: SCHEMA_VERSION,
        });
    }
    let model: BimModel = serde_json::from_str(text).map_err(|e| Error::parse(loc(&e), e.to_string()))?;
    model.validate()?;
    Ok(model)
}
