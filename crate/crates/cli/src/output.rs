//! Rendering of command results as CSV or line-delimited JSON, behind a
//! `#` comment header.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub enum Body {
    Table(Table),
    /// A single structured record with its own CSV rendering.
    Record { json: Value, csv: String },
}

/// Everything a command produces.
pub struct Output {
    pub body: Body,
    /// Extra header lines, e.g. derived quantities.
    pub notes: Vec<String>,
}

impl Output {
    pub fn table(table: Table) -> Self {
        Self {
            body: Body::Table(table),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Resolved invocation, echoed at the top of every output.
pub struct Header {
    pub command: &'static str,
    pub flags: Vec<(String, String)>,
    pub seed: u64,
}

impl Header {
    pub fn render(&self, notes: &[String]) -> String {
        let mut out = format!("# rhomap {}\n# command: {}\n", env!("CARGO_PKG_VERSION"), self.command);
        let flags: Vec<String> = self.flags.iter().map(|(k, v)| format!("--{k} {v}")).collect();
        let _ = writeln!(out, "# flags: {}", flags.join(" "));
        let _ = writeln!(out, "# seed: {}", self.seed);
        for note in notes {
            let _ = writeln!(out, "# {note}");
        }
        out
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render(header: &Header, output: &Output, format: Format) -> String {
    let mut out = header.render(&output.notes);
    match (&output.body, format) {
        (Body::Table(t), Format::Csv) => {
            let _ = writeln!(out, "{}", t.columns.join(","));
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        (Body::Table(t), Format::Json) => {
            for row in &t.rows {
                let record: Map<String, Value> = t
                    .columns
                    .iter()
                    .map(|c| c.to_string())
                    .zip(row.iter().cloned())
                    .collect();
                let _ = writeln!(out, "{}", Value::Object(record));
            }
        }
        (Body::Record { csv, .. }, Format::Csv) => out.push_str(csv),
        (Body::Record { json, .. }, Format::Json) => {
            let _ = writeln!(out, "{json}");
        }
    }
    out
}
