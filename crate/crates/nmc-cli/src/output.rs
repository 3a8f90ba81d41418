//! Report assembly and serialization. Both formats carry the same payload:
//! a metadata block (version, command, effective configuration) and a table.
//! Output is deterministic; nothing here reads the clock.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::{usage, CliError, Format};

/// One table cell. Floats print with 17 significant digits so that a reread
/// recovers the exact double.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

pub fn sig17(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Float(v) => sig17(*v),
            Cell::Text(t) => {
                if t.contains(',') || t.contains('"') || t.contains('\n') {
                    format!("\"{}\"", t.replace('"', "\"\""))
                } else {
                    t.clone()
                }
            }
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(n) => json!(n),
            Cell::Float(v) => {
                if v.is_nan() {
                    Value::Null
                } else {
                    json!(v)
                }
            }
            Cell::Text(t) => json!(t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table::with_columns(columns.iter().map(|c| c.to_string()).collect())
    }

    pub fn with_columns(columns: Vec<String>) -> Table {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a command produces. `extra_meta` holds derived scalars such as
/// the solved critical width; `config` echoes the effective run settings.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub config: Vec<(&'static str, Value)>,
    pub extra_meta: Vec<(&'static str, Value)>,
    pub table: Table,
    /// Extra comment lines for the CSV header block (JSON carries the same
    /// content inside `meta` or `data` instead).
    pub csv_comments: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, table: Table) -> Report {
        Report {
            command,
            config: Vec::new(),
            extra_meta: Vec::new(),
            table,
            csv_comments: Vec::new(),
        }
    }

    fn meta_value(&self) -> Value {
        let mut config = Map::new();
        for (k, v) in &self.config {
            config.insert((*k).into(), v.clone());
        }
        let mut meta = Map::new();
        meta.insert("command".into(), json!(self.command));
        meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        meta.insert("config".into(), Value::Object(config));
        for (k, v) in &self.extra_meta {
            meta.insert((*k).into(), v.clone());
        }
        Value::Object(meta)
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.table.columns.iter().zip(row) {
                    obj.insert(name.clone(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "meta": self.meta_value(), "data": rows });
        let mut text = serde_json::to_string_pretty(&doc).expect("serializable report");
        text.push('\n');
        text
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# nmc {} command={}\n",
            env!("CARGO_PKG_VERSION"),
            self.command
        ));
        for (k, v) in &self.config {
            out.push_str(&format!("# config {k}={}\n", plain(v)));
        }
        for (k, v) in &self.extra_meta {
            out.push_str(&format!("# {k}={}\n", plain(v)));
        }
        for line in &self.csv_comments {
            out.push_str(&format!("# {line}\n"));
        }
        out.push_str(&self.table.columns.join(","));
        out.push('\n');
        for row in &self.table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }
}

/// Comment-block rendering of a metadata value: strings unquoted, floats via
/// [`sig17`], everything else as compact JSON.
fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => sig17(x),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

pub fn emit(report: &Report, format: Format, out: Option<&std::path::Path>) -> Result<(), CliError> {
    let text = report.render(format);
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
            file.write_all(text.as_bytes())
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .map_err(|e| usage(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(())
}
