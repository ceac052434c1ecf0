//! Shared helpers for the CLI test suites: binary invocation and a small
//! JSON-schema checker covering the subset used by the checked-in schemas
//! (type, enum, required, properties, items, definitions/$ref).
#![allow(dead_code)] // each test target uses a different subset

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treespan"))
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

pub fn load_schema(name: &str) -> serde_json::Value {
    let path = schema_dir().join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("schema {path:?} unreadable: {e}"));
    serde_json::from_str(&text).expect("schema parses")
}

fn type_matches(ty: &str, value: &serde_json::Value) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        other => panic!("unsupported schema type {other}"),
    }
}

fn resolve<'a>(root: &'a serde_json::Value, node: &'a serde_json::Value) -> &'a serde_json::Value {
    if let Some(reference) = node.get("$ref").and_then(|r| r.as_str()) {
        let path = reference
            .strip_prefix("#/")
            .unwrap_or_else(|| panic!("unsupported $ref {reference}"));
        let mut cur = root;
        for seg in path.split('/') {
            cur = cur
                .get(seg)
                .unwrap_or_else(|| panic!("dangling $ref {reference}"));
        }
        cur
    } else {
        node
    }
}

fn check(root: &serde_json::Value, schema: &serde_json::Value, value: &serde_json::Value, at: &str) {
    let schema = resolve(root, schema);
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            serde_json::Value::String(s) => type_matches(s, value),
            serde_json::Value::Array(options) => options
                .iter()
                .any(|t| type_matches(t.as_str().expect("type name"), value)),
            other => panic!("unsupported type spec {other}"),
        };
        assert!(ok, "{at}: value {value} does not match type {ty}");
    }
    if let Some(options) = schema.get("enum").and_then(|e| e.as_array()) {
        assert!(
            options.contains(value),
            "{at}: value {value} not in enum {options:?}"
        );
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        let obj = value.as_object().unwrap_or_else(|| {
            panic!("{at}: required-keys schema applied to non-object {value}")
        });
        for key in required {
            let key = key.as_str().expect("required key");
            assert!(obj.contains_key(key), "{at}: missing required key {key:?}");
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    check(root, sub, v, &format!("{at}.{key}"));
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                check(root, items, v, &format!("{at}[{i}]"));
            }
        }
    }
}

pub fn assert_matches_schema(schema_file: &str, json_text: &str) {
    let schema = load_schema(schema_file);
    let value: serde_json::Value =
        serde_json::from_str(json_text).expect("command output is valid JSON");
    check(&schema, &schema, &value, "$");
}
