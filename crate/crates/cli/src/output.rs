//! Tabular results written as CSV or JSON lines, each preceded by a
//! provenance record.

use std::io::{self, Write};

use serde_json::{json, Map, Value};

use crate::config::Format;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    /// Floats carry 17 significant digits so that they reload exactly.
    fn to_csv(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Identifies the tool version, the command and the configuration digest.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: &'static str,
    pub config_sha256: String,
}

pub fn write_table<W: Write>(out: W, format: Format, prov: &Provenance, table: &Table) -> io::Result<()> {
    let version = env!("CARGO_PKG_VERSION");
    match format {
        Format::Csv => {
            let mut out = out;
            writeln!(
                out,
                "# qwork {version} command={} config-sha256={}",
                prov.command, prov.config_sha256
            )?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::to_csv))?;
            }
            w.flush()
        }
        Format::JsonLines => {
            let mut out = io::BufWriter::new(out);
            let header = json!({
                "qwork": version,
                "command": prov.command,
                "config_sha256": prov.config_sha256,
                "columns": table.columns,
            });
            writeln!(out, "{header}")?;
            for row in &table.rows {
                let obj: Map<String, Value> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.to_json()))
                    .collect();
                writeln!(out, "{}", Value::Object(obj))?;
            }
            out.flush()
        }
    }
}
