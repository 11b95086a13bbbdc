use std::fmt;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use entrain_core::output::{format_number, round_sig15};
use serde_json::Value;

use crate::args::{Format, OutputArgs};

/// Malformed command-line input (exit 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Measured distance exceeded the computed bound (exit 4).
#[derive(Debug)]
pub struct BoundViolation(pub String);

impl fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bound violated: {}", self.0)
    }
}

impl std::error::Error for BoundViolation {}

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MODEL: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<BoundViolation>() {
            return EXIT_VIOLATION;
        }
        if cause.is::<UsageError>()
            || cause.is::<std::io::Error>()
            || cause.is::<serde_json::Error>()
        {
            return EXIT_INPUT;
        }
        if let Some(e) = cause.downcast_ref::<entrain_core::Error>() {
            return if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_MODEL
            };
        }
    }
    EXIT_MODEL
}

/// Output closed early by the reader, as in `entrain orbit ... | head`.
pub fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

/// Ordered `key=value` pairs for the `# ` comment line and the JSON header.
#[derive(Debug, Default)]
pub struct Meta {
    entries: Vec<(String, Value)>,
}

impl Meta {
    pub fn text(mut self, key: &str, value: impl Into<String>) -> Self {
        self.entries.push((key.into(), Value::String(value.into())));
        self
    }

    pub fn number(mut self, key: &str, value: f64) -> Self {
        self.entries.push((key.into(), json_number(value)));
        self
    }

    pub fn count(mut self, key: &str, value: usize) -> Self {
        self.entries.push((key.into(), Value::from(value)));
        self
    }

    pub fn params(mut self, params: &[(String, f64)]) -> Self {
        let map = params
            .iter()
            .map(|(k, v)| (k.clone(), json_number(*v)))
            .collect();
        self.entries.push(("params".into(), Value::Object(map)));
        self
    }

    pub fn line(&self) -> String {
        let fields: Vec<String> = self
            .entries
            .iter()
            .map(|(k, v)| format!("{k}={}", meta_value(v)))
            .collect();
        format!("# {}\n", fields.join("; "))
    }

    pub fn into_json(self, body: Value) -> Value {
        let mut map: serde_json::Map<String, Value> = self.entries.into_iter().collect();
        if let Value::Object(fields) = body {
            map.extend(fields);
        }
        Value::Object(map)
    }
}

fn meta_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), format_number),
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| format!("{k}={}", meta_value(v)))
            .collect::<Vec<_>>()
            .join(","),
        Value::Null => "NaN".into(),
        other => other.to_string(),
    }
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig15(x)).map_or(Value::Null, Value::Number)
}

/// Round every float in a JSON tree to 15 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json_number(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

pub fn csv_row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format_number(*v)).collect();
    format!("{}\n", cells.join(","))
}

/// Emit either the CSV (prefixed by the meta line) or the JSON document.
pub fn emit(out: &OutputArgs, meta: Meta, csv_body: impl FnOnce() -> String, json_body: impl FnOnce() -> Value) -> Result<()> {
    let text = match out.format {
        Format::Csv => format!("{}{}", meta.line(), csv_body()),
        Format::Json => {
            let doc = round_floats(meta.into_json(json_body()));
            format!("{}\n", serde_json::to_string_pretty(&doc)?)
        }
    };
    match &out.output {
        Some(path) => write_file(path, &text),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
