use std::io::Write;

use realdyn::entropy::EntropyEstimate;
use realdyn::Point64;
use serde_json::{json, Value};

use crate::CliError;

/// A point of the circle: its real value, or `"inf"`.
pub fn point(p: &Point64) -> Value {
    match p.value() {
        Some(x) => json!(x),
        None => json!("inf"),
    }
}

pub fn point_text(p: &Point64) -> String {
    match p.value() {
        Some(x) => x.to_string(),
        None => "inf".into(),
    }
}

pub fn estimate_fields(e: &EntropyEstimate) -> Value {
    json!({
        "value": e.value,
        "lower": e.lower,
        "upper": e.upper,
        "depth": e.depth,
        "method": e.method.as_str(),
    })
}

/// Merges the fields of `extra` into `base` (both objects).
pub fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

pub fn write_json(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(|e| CliError {
        code: 1,
        message: e.to_string(),
    })?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn csv_error(e: csv::Error) -> CliError {
    CliError {
        code: 1,
        message: e.to_string(),
    }
}

/// Columns after the parameters in every entropy table.
pub const ENTROPY_COLUMNS: [&str; 7] = ["d", "s", "entropy", "lower", "upper", "method", "status"];

/// One entropy table row; missing values are empty cells.
pub fn entropy_cells(d: Option<i64>, s: Option<i64>, e: Option<&EntropyEstimate>, status: &str) -> Vec<String> {
    let opt = |x: Option<String>| x.unwrap_or_default();
    vec![
        opt(d.map(|v| v.to_string())),
        opt(s.map(|v| v.to_string())),
        opt(e.map(|e| e.value.to_string())),
        opt(e.map(|e| e.lower.to_string())),
        opt(e.map(|e| e.upper.to_string())),
        opt(e.map(|e| e.method.as_str().to_string())),
        status.to_string(),
    ]
}
