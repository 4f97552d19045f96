use anyhow::Result;
use powlab::report::format_value;
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

/// Renders `value` as JSON, as CSV (one row per array element), or as
/// `key  value` lines when no custom human text is given.
pub fn render<T: Serialize>(format: Format, value: &T, human: Option<String>) -> Result<String> {
    let json = serde_json::to_value(value)?;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&json)? + "\n",
        Format::Csv => csv_of(&json)?,
        Format::Human => human.unwrap_or_else(|| key_values(&json)),
    })
}

fn rows(json: &Value) -> Vec<&serde_json::Map<String, Value>> {
    match json {
        Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
        Value::Object(map) => vec![map],
        _ => Vec::new(),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_of(json: &Value) -> Result<String> {
    let rows = rows(json);
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        w.write_record(first.keys())?;
    }
    for row in rows {
        w.write_record(row.values().map(cell))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn human_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format_value(n.as_f64().unwrap_or(f64::NAN)),
        Value::Null => "-".into(),
        Value::Array(items) => items.iter().map(human_cell).collect::<Vec<_>>().join(", "),
        other => cell(other),
    }
}

fn key_values(json: &Value) -> String {
    let mut out = String::new();
    for (i, row) in rows(json).into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let width = row.keys().map(String::len).max().unwrap_or(0);
        for (k, v) in row {
            out.push_str(&format!("{k:<width$}  {}\n", human_cell(v)));
        }
    }
    out
}
