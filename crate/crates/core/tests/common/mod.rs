//! Shared helpers for the integration tests: running the binary and
//! checking its JSON against the published schemas.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_g2lab"))
}

pub fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).env("G2LAB_THREADS", "2").output().expect("spawn g2lab")
}

pub fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

pub fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

pub fn schema(name: &str) -> Value {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "schemas", &format!("{name}.json")].iter().collect();
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn type_matches(v: &Value, ty: &str) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|x| x.fract() == 0.0),
        other => panic!("schema uses unsupported type {other}"),
    }
}

/// Validates `v` against the keywords the published schemas use: `type`,
/// `const`, `enum`, `required`, `properties`, `additionalProperties`,
/// `items`, `minItems`, `maxItems` and `minimum`. Returns every violation
/// with its JSON pointer.
pub fn violations(v: &Value, schema: &Value, at: &str) -> Vec<String> {
    let mut errs = Vec::new();
    let s = schema.as_object().expect("schema must be an object");
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_matches(v, t),
            Value::Array(ts) => ts.iter().any(|t| type_matches(v, t.as_str().unwrap())),
            _ => panic!("bad type keyword"),
        };
        if !ok {
            errs.push(format!("{at}: expected type {t}, got {v}"));
            return errs;
        }
    }
    if let Some(c) = s.get("const") {
        if v != c {
            errs.push(format!("{at}: expected {c}, got {v}"));
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            errs.push(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let (Some(min), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            errs.push(format!("{at}: {x} below minimum {min}"));
        }
    }
    if let Value::Object(map) = v {
        for key in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !map.contains_key(key.as_str().unwrap()) {
                errs.push(format!("{at}: missing key {key}"));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, child) in map {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => errs.extend(violations(child, sub, &format!("{at}/{k}"))),
                None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errs.push(format!("{at}: unexpected key {k:?}"))
                }
                None => {}
            }
        }
    }
    if let Value::Array(items) = v {
        let len = items.len() as u64;
        if s.get("minItems").and_then(Value::as_u64).is_some_and(|n| len < n) {
            errs.push(format!("{at}: {len} items, fewer than minItems"));
        }
        if s.get("maxItems").and_then(Value::as_u64).is_some_and(|n| len > n) {
            errs.push(format!("{at}: {len} items, more than maxItems"));
        }
        if let Some(sub) = s.get("items") {
            for (i, item) in items.iter().enumerate() {
                errs.extend(violations(item, sub, &format!("{at}/{i}")));
            }
        }
    }
    errs
}

pub fn assert_schema(v: &Value, name: &str) {
    let errs = violations(v, &schema(name), "");
    assert!(errs.is_empty(), "{name} schema violations:\n{}", errs.join("\n"));
}
