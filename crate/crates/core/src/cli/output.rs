use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value as Json};

use super::config::OutputFormat;
use crate::error::Result;
use crate::montecarlo::Cell;

/// Version of the CSV/JSON layout; bumped on any column change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Real(f64),
    Text(String),
}

impl From<Cell> for Value {
    fn from(c: Cell) -> Self {
        match c {
            Cell::Int(v) => Value::Int(v),
            Cell::Real(v) => Value::Real(v),
            Cell::Status(s) => Value::Text(s.to_string()),
        }
    }
}

impl Value {
    /// Reals use 17 significant digits so the text round-trips exactly.
    fn csv(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Real(v) if v.is_nan() => "nan".into(),
            Value::Real(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Value::Real(v) => format!("{v:.16e}"),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(v) => json!(v),
            Value::Real(v) => serde_json::Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Value::Text(s) => json!(s),
        }
    }
}

/// Rows of one command's output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# wickfbm schema={SCHEMA_VERSION} version={} command={}\n",
            env!("CARGO_PKG_VERSION"),
            self.command
        );
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.clone(), v.json());
                }
                Json::Object(m)
            })
            .collect();
        let doc = json!({
            "schema": SCHEMA_VERSION,
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values are serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Writes to `path`, or stdout when `None`.
    pub fn emit(&self, format: OutputFormat, path: Option<&Path>) -> Result<()> {
        let text = self.render(format);
        match path {
            Some(p) => fs::write(p, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}
