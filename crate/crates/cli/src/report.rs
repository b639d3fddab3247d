//! Report serialization. Every float is written with 17 significant digits.

use std::fmt::Write as _;

use serde_json::Value;

/// Scientific notation with 17 significant digits, e.g. `-2.1460000000000001e0`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn format_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format_float(n.as_f64().unwrap_or(f64::NAN))
    } else {
        n.to_string()
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn write_json(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    let close = "  ".repeat(indent);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&format_number(n)),
        Value::String(s) => out.push_str(&quote(s)),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_json(out, item, indent);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                write_json(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&close);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                let _ = write!(out, "{pad}{}: ", quote(k));
                write_json(out, v, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&close);
            out.push('}');
        }
    }
}

pub fn to_json(value: &Value) -> String {
    let mut out = String::new();
    write_json(&mut out, value, 0);
    out.push('\n');
    out
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => rows.push((prefix.to_string(), format_number(n))),
        Value::String(s) => {
            rows.push((prefix.to_string(), s.replace(['\t', '\n'], " ")));
        }
    }
}

/// Long format: a `key\tvalue` header, then one row per leaf with
/// dot-separated paths.
pub fn to_tsv(value: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let mut out = String::from("key\tvalue\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k}\t{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_keep_seventeen_digits() {
        for x in [-2.146, 0.1, 1.0 / 3.0, 6.02e23, -1e-300, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(
                mantissa.chars().filter(char::is_ascii_digit).count(),
                17,
                "{s}"
            );
        }
        assert_eq!(format_float(f64::NAN), "null");
    }

    #[test]
    fn json_writer_round_trips() {
        let v = json!({"a": [1.5, 2, -0.25], "b": {"c": "x\"y", "d": [{"e": null}]}, "f": true});
        let text = to_json(&v);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"][0].as_f64(), Some(1.5));
        assert_eq!(back["a"][1].as_u64(), Some(2));
        assert_eq!(back["b"]["c"], "x\"y");
        assert!(text.contains("1.5000000000000000e0"));
    }

    #[test]
    fn tsv_has_one_header() {
        let v = json!({"x": {"y": [0.5, 1]}, "s": "a\tb"});
        let t = to_tsv(&v);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "key\tvalue");
        assert!(lines.contains(&"x.y.0\t5.0000000000000000e-1"));
        assert!(lines.contains(&"x.y.1\t1"));
        assert!(lines.contains(&"s\ta b"));
        assert_eq!(lines.iter().filter(|l| l.starts_with("key\t")).count(), 1);
    }
}
