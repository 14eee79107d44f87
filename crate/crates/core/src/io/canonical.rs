//! Canonical JSON rendering and digests.
//!
//! Keys are sorted, no insignificant whitespace, numbers in shortest
//! round-trip form. Integral floats render as integers so `1` and `1.0`
//! canonicalize identically.

use serde_json::Value;
use sha2::{Digest, Sha256};

const MAX_EXACT_INTEGER: f64 = 9_007_199_254_740_992.0;

pub fn to_canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

/// Hex SHA-256 of the canonical rendering.
pub fn digest(value: &Value) -> String {
    let hash = Sha256::digest(to_canonical_string(value).as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(n, out),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_value(&map[key], out);
            }
            out.push('}');
        }
    }
}

fn write_number(n: &serde_json::Number, out: &mut String) {
    if n.is_u64() || n.is_i64() {
        out.push_str(&n.to_string());
        return;
    }
    let x = n.as_f64().unwrap_or(f64::NAN);
    if x.fract() == 0.0 && x.abs() < MAX_EXACT_INTEGER {
        out.push_str(&format!("{}", x as i64));
    } else {
        out.push_str(&format_float(x));
    }
}

/// Shortest round-trip decimal rendering, `.` as the decimal point.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_order_and_whitespace_do_not_matter() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": {"y": [1, 2.5], "x": "s"}}"#).unwrap();
        let b: Value = serde_json::from_str("{\"a\":{\"x\":\"s\",\n \"y\":[1.0,2.5]},\"b\":1}").unwrap();
        assert_eq!(to_canonical_string(&a), r#"{"a":{"x":"s","y":[1,2.5]},"b":1}"#);
        assert_eq!(digest(&a), digest(&b));
    }

    #[test]
    fn value_change_changes_digest() {
        let a: Value = serde_json::from_str(r#"{"k": 0.1}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"k": 0.10000000000000002}"#).unwrap();
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }

    #[test]
    fn float_rendering_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-7, 123456.789, -2.5] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
            assert!(!format_float(x).contains(','));
        }
        assert_eq!(format_float(-0.0), "0");
    }
}
