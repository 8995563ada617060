//! JSON config loading with unit suffixes.
//!
//! Any string value of the form `"<number> <unit>"` is replaced by the number
//! in SI units before deserialization, so `"600 MHz"`, `"25 cm"`, `"20 deg"`
//! and `"5 %"` are all accepted wherever a number is expected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Number, Value};

use super::CliError;

enum Scale {
    Mul(f64),
    Div(f64),
}

// Sub-unit prefixes divide so that "70 cm" parses to exactly 0.7.
const UNITS: &[(&str, Scale)] = &[
    ("GHz", Scale::Mul(1e9)),
    ("MHz", Scale::Mul(1e6)),
    ("kHz", Scale::Mul(1e3)),
    ("Hz", Scale::Mul(1.0)),
    ("km", Scale::Mul(1e3)),
    ("mm", Scale::Div(1e3)),
    ("cm", Scale::Div(1e2)),
    ("m", Scale::Mul(1.0)),
    ("deg", Scale::Mul(std::f64::consts::PI / 180.0)),
    ("rad", Scale::Mul(1.0)),
    ("%", Scale::Div(1e2)),
    ("S/m", Scale::Mul(1.0)),
];

/// Parses `"<number><unit>"`; `None` when the string is not a quantity.
pub fn parse_quantity(text: &str) -> Option<f64> {
    let text = text.trim();
    for (unit, scale) in UNITS {
        if let Some(number) = text.strip_suffix(unit) {
            let number = number.trim_end();
            if number.is_empty() {
                continue;
            }
            if let Ok(v) = number.parse::<f64>() {
                return Some(match scale {
                    Scale::Mul(m) => v * m,
                    Scale::Div(d) => v / d,
                });
            }
        }
    }
    None
}

/// Replaces every quantity string in `value` by its SI number.
pub fn normalize_units(value: &mut Value, path: &str) -> Result<(), CliError> {
    match value {
        Value::String(s) => {
            if let Some(v) = parse_quantity(s) {
                *value = Value::Number(Number::from_f64(v).ok_or_else(|| {
                    CliError::Config(format!("{path}: quantity '{s}' is not finite"))
                })?);
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter_mut().enumerate() {
                normalize_units(item, &format!("{path}[{i}]"))?;
            }
        }
        Value::Object(map) => {
            for (k, v) in map.iter_mut() {
                normalize_units(v, &format!("{path}.{k}"))?;
            }
        }
        _ => {}
    }
    Ok(())
}

/// Reads and unit-normalizes a JSON document.
pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    normalize_units(&mut value, "$")?;
    Ok(value)
}

/// Deserializes `value`, reporting the JSON path of the first mismatch.
pub fn from_value<T: DeserializeOwned>(value: Value, origin: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value)
        .map_err(|e| CliError::Config(format!("{origin}: at {}: {}", e.path(), e.inner())))
}

/// Overlays `patch` onto `base`, recursing into objects.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => merge_maps(b, p),
        (b, p) => *b = p,
    }
}

fn merge_maps(base: &mut Map<String, Value>, patch: Map<String, Value>) {
    for (k, v) in patch {
        match base.get_mut(&k) {
            Some(slot) => merge(slot, v),
            None => {
                base.insert(k, v);
            }
        }
    }
}
