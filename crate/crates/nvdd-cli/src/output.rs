//! Result tables and their CSV/JSON renderings.
//!
//! Every subcommand produces one or more [`Table`]s. A table carries its
//! run parameters as a JSON metadata object so an output file is
//! self-describing: CSV files start with a `#`-prefixed metadata line,
//! JSON files embed the same object. Numbers are rendered through
//! `serde_json`, whose shortest-round-trip formatting keeps reruns
//! byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

/// Output encoding for result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Comma-separated values behind a `#`-prefixed JSON metadata line.
    Csv,
    /// One JSON object holding metadata, columns, and rows.
    Json,
}

impl Format {
    /// File extension used when writing.
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One named table of results.
#[derive(Debug, Clone)]
pub struct Table {
    /// File stem of the output.
    pub name: String,
    /// Run parameters echoed into the output header.
    pub metadata: Value,
    /// Column names, in order.
    pub columns: Vec<String>,
    /// Row-major cell values.
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    /// Build a table whose cells are all numbers.
    pub fn from_f64(name: &str, metadata: Value, columns: &[&str], rows: &[Vec<f64>]) -> Self {
        Table {
            name: name.to_string(),
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&v| json_number(v)).collect())
                .collect(),
        }
    }

    /// Render the table in the requested format.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = format!("# {}\n", self.metadata);
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(cell_text).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let doc = serde_json::json!({
                    "metadata": self.metadata,
                    "columns": self.columns,
                    "rows": self.rows,
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
                text.push('\n');
                text
            }
        }
    }

    /// Write `dir/name.ext`, creating the directory if needed, and return
    /// the path written.
    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("create {}: {e}", dir.display())))?;
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        fs::write(&path, self.render(format))
            .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))?;
        Ok(path)
    }
}

/// A finite f64 as a JSON number; non-finite values become null.
pub fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// CSV text for one cell: numbers bare, strings unquoted.
fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_layout() {
        let t = Table::from_f64(
            "demo",
            json!({"n_p": 4}),
            &["x", "y"],
            &[vec![1.0, 0.5], vec![2.0, 0.25]],
        );
        let text = t.render(Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# {\"n_p\":4}");
        assert_eq!(lines[1], "x,y");
        assert_eq!(lines[2], "1.0,0.5");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn json_round_trip() {
        let t = Table::from_f64("demo", json!({}), &["x"], &[vec![1.5]]);
        let doc: Value = serde_json::from_str(&t.render(Format::Json)).unwrap();
        assert_eq!(doc["columns"][0], "x");
        assert_eq!(doc["rows"][0][0], 1.5);
    }

    #[test]
    fn rendering_is_deterministic() {
        let t = Table::from_f64(
            "demo",
            json!({"b": 2, "a": 1}),
            &["x"],
            &[vec![0.1234567890123]],
        );
        assert_eq!(t.render(Format::Csv), t.render(Format::Csv));
        // metadata keys come out sorted regardless of insertion order
        assert!(t.render(Format::Csv).starts_with("# {\"a\":1,\"b\":2}"));
    }
}
