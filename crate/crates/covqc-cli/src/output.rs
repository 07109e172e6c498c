//! CSV and JSON emission.
//!
//! Every artifact embeds the run configuration: CSV files start with a
//! `# config {...}` comment followed by the header row, JSON files carry a
//! `config` object. Floats are printed with 17 significant digits in CSV;
//! JSON floats use the shortest representation that round-trips exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Unit handling for entropic quantities: nats by default, bits on request.
/// The conversion applies to displayed values only; nothing inside the
/// library ever sees it.
pub struct Display {
    pub unit: f64,
    pub units: &'static str,
}

impl Display {
    pub fn new(bits: bool) -> Self {
        if bits {
            Display { unit: std::f64::consts::LOG2_E, units: "bits" }
        } else {
            Display { unit: 1.0, units: "nats" }
        }
    }

    pub fn entropy(&self, nats: f64) -> f64 {
        nats * self.unit
    }
}

pub enum Field {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Float(v) => format!("{v:.16e}"),
            Field::Int(v) => v.to_string(),
            Field::Text(s) => s.clone(),
            Field::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Float(v) => Value::from(*v),
            Field::Int(v) => Value::from(*v),
            Field::Text(s) => Value::from(s.as_str()),
            Field::Empty => Value::Null,
        }
    }
}

pub struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, config: &Value) -> String {
        let mut out = format!("# config {config}\n");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Field::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, config: &Value) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut object = Map::new();
                for (column, field) in self.columns.iter().zip(row) {
                    object.insert((*column).to_string(), field.json());
                }
                Value::Object(object)
            })
            .collect();
        let mut root = Map::new();
        root.insert("config".to_string(), config.clone());
        root.insert("rows".to_string(), Value::Array(rows));
        Value::Object(root)
    }
}

pub fn render_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("tree of plain values");
    text.push('\n');
    text
}

pub fn emit(out: Option<&Path>, payload: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, payload),
        None => io::stdout().write_all(payload.as_bytes()),
    }
}

pub fn write_table(table: &Table, config: &Value, format: Format, out: Option<&Path>) -> io::Result<()> {
    let payload = match format {
        Format::Csv => table.to_csv(config),
        Format::Json => render_json(&table.to_json(config)),
    };
    emit(out, &payload)
}
