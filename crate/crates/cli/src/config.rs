//! Versioned JSON configuration files.
//!
//! A file holds `"schema": 1` plus any subset of a command's configuration
//! fields. Its fields are merged over the command defaults and the result is
//! deserialized strictly, so unknown or misspelled fields are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub const SCHEMA_VERSION: u64 = 1;

/// Read a config file and return its fields with the schema marker removed.
pub fn read_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
    };
    match obj.remove("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => Ok(obj),
        Some(other) => Err(CliError::Config(format!(
            "{}: unsupported schema {other}, expected {SCHEMA_VERSION}",
            path.display()
        ))),
        None => Err(CliError::Config(format!(
            "{}: missing \"schema\": {SCHEMA_VERSION}",
            path.display()
        ))),
    }
}

/// Recursively overlay `top` onto `base`; objects merge, other values replace.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `defaults` overlaid with the file at `path`, if any.
pub fn layered<T: Serialize + DeserializeOwned>(defaults: T, path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(defaults);
    };
    let file = read_file(path)?;
    let mut base = serde_json::to_value(&defaults).map_err(|e| CliError::Runtime(e.to_string()))?;
    // a tagged enum cannot be merged field by field once its tag changes
    if let Value::Object(b) = &mut base {
        for (k, v) in &file {
            if let (Some(Value::Object(old)), Value::Object(new)) = (b.get(k), v) {
                if new.get("kind").is_some_and(|kind| Some(kind) != old.get("kind")) {
                    b.remove(k);
                }
            }
        }
    }
    merge(&mut base, Value::Object(file));
    serde_json::from_value(base).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// The effective configuration as a standalone config file.
pub fn to_file_value<T: Serialize>(cfg: &T) -> Result<Value, CliError> {
    let mut out = Map::new();
    out.insert("schema".into(), Value::from(SCHEMA_VERSION));
    match serde_json::to_value(cfg).map_err(|e| CliError::Runtime(e.to_string()))? {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("config".into(), other);
        }
    }
    Ok(Value::Object(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use ybip::verify::MapsSuiteConfig;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn partial_file_overrides_defaults() {
        let f = file(r#"{"schema": 1, "points": 17}"#);
        let cfg = layered(MapsSuiteConfig::default(), Some(f.path())).unwrap();
        assert_eq!(cfg.points, 17);
        assert_eq!(cfg.seed, MapsSuiteConfig::default().seed);
    }

    #[test]
    fn unknown_field_rejected() {
        let f = file(r#"{"schema": 1, "pionts": 17}"#);
        assert!(matches!(
            layered(MapsSuiteConfig::default(), Some(f.path())),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn schema_required() {
        let f = file(r#"{"points": 17}"#);
        assert!(layered(MapsSuiteConfig::default(), Some(f.path())).is_err());
        let f = file(r#"{"schema": 2, "points": 17}"#);
        assert!(layered(MapsSuiteConfig::default(), Some(f.path())).is_err());
    }

    #[test]
    fn round_trip_through_file_value() {
        let cfg = MapsSuiteConfig::default();
        let v = to_file_value(&cfg).unwrap();
        let f = file(&v.to_string());
        assert_eq!(layered(MapsSuiteConfig { points: 1, ..cfg.clone() }, Some(f.path())).unwrap(), cfg);
    }
}
