//! Deterministic report emission: an ordered JSON value type with floats
//! printed to 17 significant digits, and matching CSV writers. Field order
//! is insertion order, so identical runs produce byte-identical files
//! (the timestamp is the one intentionally varying field).

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

/// 17 significant digits; round-trips every f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "\"nan\"".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "\"+inf\"" } else { "\"-inf\"" }.to_string();
    }
    format!("{v:.16e}")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

impl Json {
    fn write_into(&self, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        let pad_in = "  ".repeat(indent + 1);
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(v) => out.push_str(&fmt_f64(*v)),
            Json::Str(s) => {
                let _ = write!(out, "\"{}\"", escape(s));
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    out.push_str(&pad_in);
                    item.write_into(out, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&pad);
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (k, v)) in fields.iter().enumerate() {
                    let _ = write!(out, "{pad_in}\"{}\": ", escape(k));
                    v.write_into(out, indent + 1);
                    if i + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&pad);
                out.push('}');
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_into(&mut out, 0);
        out.push('\n');
        out
    }
}

/// One verified numeric claim: value, the tolerance it was checked
/// against, and the verdict.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn to_json(&self) -> Json {
        Json::Obj(vec![
            ("name".into(), Json::Str(self.name.clone())),
            ("value".into(), Json::Num(self.value)),
            ("tolerance".into(), Json::Num(self.tolerance)),
            ("pass".into(), Json::Bool(self.pass)),
            ("detail".into(), Json::Str(self.detail.clone())),
        ])
    }
}

/// CSV with a header; floats use the same 17-digit format as the JSON
/// (without the quoting rules — numeric columns only).
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| {
                if v.is_finite() {
                    format!("{v:.16e}")
                } else if v.is_nan() {
                    "nan".to_string()
                } else if *v > 0.0 {
                    "+inf".to_string()
                } else {
                    "-inf".to_string()
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_significant_digits() {
        let s = fmt_f64(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        let parsed: f64 = s.parse().unwrap();
        assert_eq!(parsed, std::f64::consts::PI);
    }

    #[test]
    fn json_objects_preserve_field_order() {
        let j = Json::Obj(vec![
            ("zulu".into(), Json::Int(1)),
            ("alpha".into(), Json::Num(0.5)),
            ("list".into(), Json::Arr(vec![Json::Bool(true), Json::Null])),
        ]);
        let text = j.to_text();
        let zi = text.find("zulu").unwrap();
        let ai = text.find("alpha").unwrap();
        assert!(zi < ai, "insertion order must be preserved");
    }

    #[test]
    fn special_floats_become_strings() {
        assert_eq!(fmt_f64(f64::INFINITY), "\"+inf\"");
        assert_eq!(fmt_f64(f64::NAN), "\"nan\"");
    }
}
