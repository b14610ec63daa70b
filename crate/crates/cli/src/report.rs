//! Report schema and its json, csv and plain renderings.

use std::io;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

/// One command's result. Flat apart from `params` and the trace arrays.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub family: String,
    /// Every flag that shaped the result, keyed by flag name, so the run can
    /// be repeated from the report alone.
    pub params: Map<String, Value>,
    pub method: String,
    pub value: f64,
    /// Exponent `E` with `value = e^E - 1`, when the result has that form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_exponent: Option<f64>,
    /// Partial sums of a series, by order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
    /// Series terms, by order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_mass_dropped: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// serde_json formatter writing floats with 17 significant digits.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Single-line JSON with full-precision floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).expect("report serialization cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (None, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => fmt_f64(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

/// Flattens a report into `(key, value)` rows; arrays expand to `key[i]`.
fn rows(report: &Report) -> Vec<(String, String)> {
    let Value::Object(fields) = serde_json::to_value(report).expect("report is an object") else {
        unreachable!()
    };
    let mut out = Vec::new();
    for (key, value) in report_order(&fields) {
        match value {
            Value::Object(params) => {
                for (k, v) in params {
                    out.push((format!("{key}.{k}"), scalar(v)));
                }
            }
            Value::Array(items) if key == "trace" || key == "terms" => {
                for (i, v) in items.iter().enumerate() {
                    out.push((format!("{key}[{i}]"), scalar(v)));
                }
            }
            // serde_json turns non-finite floats into null
            Value::Null if key == "value" => out.push((key.clone(), fmt_f64(report.value))),
            v => out.push((key.clone(), scalar(v))),
        }
    }
    out
}

const FIELD_ORDER: [&str; 16] = [
    "command", "family", "method", "value", "log_exponent", "std_error", "bound", "status",
    "truncation_order", "tail_mass_dropped", "seed", "n", "diagnostic", "params", "trace", "terms",
];

fn report_order(fields: &Map<String, Value>) -> impl Iterator<Item = (&String, &Value)> {
    FIELD_ORDER.iter().filter_map(move |name| fields.get_key_value(*name))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut out = String::from("field,value\n");
            for (k, v) in rows(report) {
                out.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&v)));
            }
            out.pop();
            out
        }
        Format::Plain => {
            let rows = rows(report);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter()
                .map(|(k, v)| format!("{k:<width$}  {v}"))
                .collect::<Vec<_>>()
                .join("\n")
        }
    }
}
