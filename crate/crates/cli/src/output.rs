//! CSV/JSON writers. Floats carry 12 significant digits so that repeated
//! runs produce byte-identical files; run metadata goes to a separate
//! `meta.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::config::{Config, Format};
use crate::CliResult;

/// A table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // round-trip through the CSV text so both files hold the same digits
            Cell::Float(v) if v.is_finite() => format_float(*v).parse::<f64>().map_or(Value::Null, Value::from),
            Cell::Float(_) | Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.11e}")
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn write_json(&self, path: &Path) -> CliResult<()> {
        write_json(path, &self.to_json())
    }
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Output directory, file naming and format for one run.
pub struct Sink {
    dir: PathBuf,
    prefix: String,
    format: Format,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(cfg: &Config) -> CliResult<Self> {
        fs::create_dir_all(&cfg.output.dir)?;
        Ok(Sink { dir: cfg.output.dir.clone(), prefix: cfg.output.prefix.clone(), format: cfg.output.format, written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}{name}", self.prefix))
    }

    /// Writes `stem.csv` and/or `stem.json` according to the format.
    pub fn table(&mut self, stem: &str, table: &Table) -> CliResult<()> {
        if self.format.csv() {
            let p = self.path(&format!("{stem}.csv"));
            table.write_csv(&p)?;
            self.written.push(p);
        }
        if self.format.json() {
            let p = self.path(&format!("{stem}.json"));
            table.write_json(&p)?;
            self.written.push(p);
        }
        Ok(())
    }

    /// Always JSON, whatever the table format.
    pub fn json(&mut self, stem: &str, value: &Value) -> CliResult<()> {
        let p = self.path(&format!("{stem}.json"));
        write_json(&p, value)?;
        self.written.push(p);
        Ok(())
    }

    /// Writes `meta.json` with the command, the effective config and a timestamp.
    pub fn finish(mut self, command: &str, cfg: &Config, extra: Value) -> CliResult<Vec<PathBuf>> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let files: Vec<String> = self
            .written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        let meta = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "unix_time": timestamp,
            "parallel": cfg!(feature = "parallel"),
            "files": files,
            "config": cfg.to_toml(),
            "summary": extra,
        });
        self.json("meta", &meta)?;
        Ok(self.written)
    }
}
