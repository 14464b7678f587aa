use std::time::Instant;

use clap::ValueEnum;
use knapcount::{ClassFlags, CountResult};
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// One line of command output. Absent fields are omitted.
#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub include_trivial: Option<bool>,
    /// Exact integer count, when the value is known exactly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count_decimal: Option<String>,
    /// Grid ratio `q` and exponent when the count is a single power `q^k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ln_count: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_bound: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_a: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_b: Option<Vec<usize>>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub flags: Option<ClassFlags>,
    pub wall_ms: f64,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn set_count(&mut self, result: &CountResult) {
        self.mode = Some(result.mode().to_string());
        self.count = result.exact_value().map(|v| v.to_string());
        self.count_decimal = Some(result.decimal(12));
        if let Some(power) = result.log_value() {
            self.q = Some(power.q.to_string());
            self.exponent = Some(power.exponent);
            self.ln_count = Some(power.ln());
        }
    }

    pub fn finish(&mut self, start: Instant) {
        self.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        let value = serde_json::to_value(self)?;
        let Value::Object(fields) = &value else {
            anyhow::bail!("report did not serialize to an object");
        };
        Ok(match format {
            Format::Json => value.to_string(),
            Format::Csv => {
                let header: Vec<&str> = fields.keys().map(String::as_str).collect();
                let row: Vec<String> = fields.values().map(|v| csv_cell(&plain(v))).collect();
                format!("{}\n{}", header.join(","), row.join(","))
            }
            Format::Text => fields
                .iter()
                .map(|(k, v)| format!("{k}: {}", plain(v)))
                .collect::<Vec<_>>()
                .join("\n"),
        })
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
