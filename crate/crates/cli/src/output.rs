//! Rendering: JSON with every float cut to the shared significant-digit count,
//! CSV through the same formatter.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use modal_core::numfmt::{fmt_num, round_sig, SIG_DIGITS};

use crate::config::{Format, Settings};
use crate::error::CliError;

pub struct Report {
    pub json: Value,
    pub csv: String,
    /// Set by regression commands; reported after the output is written.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(json: Value, csv: String) -> Self {
        Self {
            json,
            csv,
            failure: None,
        }
    }
}

pub fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap(), SIG_DIGITS);
            Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, v)| (k, round_value(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&round_value(report.json.clone()))
                .expect("json values print");
            s.push('\n');
            s
        }
        Format::Csv => report.csv.clone(),
    }
}

pub fn emit(report: &Report, settings: &Settings) -> Result<(), CliError> {
    let text = render(report, settings.format);
    match &settings.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
        }
    }
}

/// CSV builder with the shared number format.
pub struct Csv {
    text: String,
}

pub enum Cell<'a> {
    Num(f64),
    Int(u64),
    Text(&'a str),
    Bool(bool),
    OptBool(Option<bool>),
    OptNum(Option<f64>),
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let parts: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::Num(x) => fmt_num(*x),
                Cell::Int(n) => n.to_string(),
                Cell::Text(s) => s.to_string(),
                Cell::Bool(b) => b.to_string(),
                Cell::OptBool(b) => b.map(|b| b.to_string()).unwrap_or_default(),
                Cell::OptNum(x) => x.map(fmt_num).unwrap_or_default(),
            })
            .collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
