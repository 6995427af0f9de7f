use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::{CliError, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

/// Leading columns present in every CSV export.
const META: [&str; 3] = ["command", "version", "duration_s"];

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

/// One table row per element when `results` is an array, else one row.
fn rows_of(record: &RunRecord) -> Vec<Vec<(String, Value)>> {
    let items: Vec<&Value> = match &record.results {
        Value::Array(xs) => xs.iter().collect(),
        other => vec![other],
    };
    items
        .into_iter()
        .map(|item| {
            let mut cells = vec![
                ("command".to_string(), Value::String(record.config.command.name().into())),
                ("version".to_string(), Value::String(record.version.clone())),
                ("duration_s".to_string(), serde_json::json!(record.duration_s)),
            ];
            let mut body = Vec::new();
            match item {
                Value::Object(_) => flatten("", item, &mut body),
                other => body.push(("value".to_string(), other.clone())),
            }
            cells.extend(body);
            cells
        })
        .collect()
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => i.to_string(),
            (_, Some(u), _) => u.to_string(),
            (_, _, Some(x)) => format!("{x:.16e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV text for `records`: header row, 17 significant digits, LF endings.
/// All rows must have the same columns.
pub fn table_csv(records: &[RunRecord]) -> Result<String, CliError> {
    let rows: Vec<Vec<(String, Value)>> = records.iter().flat_map(rows_of).collect();
    let header: Vec<String> = match rows.first() {
        Some(r) => r.iter().map(|c| c.0.clone()).collect(),
        None => META.iter().map(|s| s.to_string()).collect(),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for (i, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.iter().map(|c| c.0.as_str()).collect();
        if cols != header.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(CliError::Usage(format!(
                "record row {i} has columns {cols:?}, expected {header:?}; CSV needs a homogeneous shape"
            )));
        }
        w.write_record(row.iter().map(|c| cell(&c.1))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Writes `records` to `path` as CSV or as a JSON array.
pub fn export_table(records: &[RunRecord], path: &Path, format: TableFormat) -> Result<(), CliError> {
    let text = match format {
        TableFormat::Csv => table_csv(records)?,
        TableFormat::Json => {
            let arr: Vec<Value> = records.iter().map(record_value).collect::<Result<_, _>>()?;
            let mut s = serde_json::to_string_pretty(&Value::Array(arr)).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn record_value(r: &RunRecord) -> Result<Value, CliError> {
    serde_json::to_value(r).map_err(|e| CliError::Io(e.to_string()))
}
