//! Minimal JSON-Schema checker covering the subset the shipped schemas use:
//! `type` (with union lists), `required`, `properties`, `items` (single or
//! positional) and `enum`.

use serde_json::Value;
use std::fs;
use std::path::Path;

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{name}.schema.json"));
    serde_json::from_str(&fs::read_to_string(&path).unwrap_or_else(|e| {
        panic!("cannot read schema {}: {e}", path.display());
    }))
    .expect("schema parses")
}

pub fn validate_file(path: &Path, schema_name: &str) {
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap())
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut errors = Vec::new();
    check(&value, &schema(schema_name), "$", &mut errors);
    assert!(errors.is_empty(), "{} violates {schema_name}: {errors:?}", path.display());
}

pub fn validate_jsonl(path: &Path, schema_name: &str) {
    let schema = schema(schema_name);
    for (lineno, line) in fs::read_to_string(path).unwrap().lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).unwrap();
        let mut errors = Vec::new();
        check(&value, &schema, "$", &mut errors);
        assert!(
            errors.is_empty(),
            "{}:{} violates {schema_name}: {errors:?}",
            path.display(),
            lineno + 1
        );
    }
}

fn type_matches(value: &Value, ty: &str) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.as_f64().is_some_and(|f| f.fract() == 0.0),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        _ => false,
    }
}

fn check(value: &Value, schema: &Value, path: &str, errors: &mut Vec<String>) {
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => type_matches(value, t),
            Value::Array(ts) => ts
                .iter()
                .filter_map(Value::as_str)
                .any(|t| type_matches(value, t)),
            _ => true,
        };
        if !ok {
            errors.push(format!("{path}: expected type {ty}, got {value}"));
            return;
        }
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            errors.push(format!("{path}: {value} not in {allowed:?}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required.iter().filter_map(Value::as_str) {
            if value.get(key).is_none() {
                errors.push(format!("{path}: missing required '{key}'"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        for (key, sub) in props {
            if let Some(v) = value.get(key) {
                check(v, sub, &format!("{path}.{key}"), errors);
            }
        }
    }
    if let (Some(items), Some(array)) = (schema.get("items"), value.as_array()) {
        match items {
            Value::Array(positional) => {
                for (idx, sub) in positional.iter().enumerate() {
                    if let Some(v) = array.get(idx) {
                        check(v, sub, &format!("{path}[{idx}]"), errors);
                    } else {
                        errors.push(format!("{path}: missing positional item {idx}"));
                    }
                }
            }
            single => {
                for (idx, v) in array.iter().enumerate() {
                    check(v, single, &format!("{path}[{idx}]"), errors);
                }
            }
        }
    }
}
