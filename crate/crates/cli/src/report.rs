//! Sweep tables, tolerance checks and the on-disk record of a run.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

/// One CSV cell. Floats are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::F(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::F(v) => v.to_string(),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    /// `(name, description)` per column.
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: &str, columns: &[(&'static str, &'static str)]) -> Self {
        Self { file: file.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.file);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.0))?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    /// Absent for ordering checks.
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass: value.is_finite() && value <= tolerance,
            value,
            tolerance: Some(tolerance),
            detail: String::new(),
        }
    }

    /// Passes when `values` strictly decrease (or increase) in order.
    pub fn monotone(name: impl Into<String>, values: &[f64], decreasing: bool) -> Self {
        let ok = values.windows(2).all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] });
        let detail = values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(" -> ");
        Self {
            name: name.into(),
            pass: ok && values.iter().all(|v| v.is_finite()),
            value: values.last().copied().unwrap_or(f64::NAN),
            tolerance: None,
            detail,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Everything an experiment produced, before anything touches the disk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub fixtures: Vec<String>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const SCHEMA_VERSION: u32 = 1;

pub fn code_version() -> String {
    format!("fockbench {}", env!("CARGO_PKG_VERSION"))
}

/// The manifest as a JSON value; object keys serialize in sorted order.
pub fn manifest(subcommand: &str, config: &Value, report: &Report, wall_time_s: f64) -> Value {
    let outputs: Vec<Value> = report
        .tables
        .iter()
        .map(|t| {
            json!({
                "file": t.file,
                "rows": t.rows.len(),
                "columns": t.columns.iter().map(|(n, d)| json!({"name": n, "description": d})).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "code_version": code_version(),
        "subcommand": subcommand,
        "config": config,
        "outputs": outputs,
        "checks": report.checks,
        "fixtures": report.fixtures,
        "pass": report.pass(),
        "wall_time_s": wall_time_s,
    })
}

pub fn render_manifest(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes every table, then the manifest. Rendering happens first so that a
/// serialization failure leaves the directory untouched.
pub fn write_all(dir: &Path, report: &Report, manifest: &Value) -> std::io::Result<()> {
    let rendered: Vec<(String, Vec<u8>)> = report
        .tables
        .iter()
        .map(|t| t.to_csv().map(|b| (t.file.clone(), b)))
        .collect::<Result<_, _>>()
        .map_err(std::io::Error::other)?;
    let m = render_manifest(manifest);
    std::fs::create_dir_all(dir)?;
    for (file, bytes) in rendered {
        std::fs::write(dir.join(file), bytes)?;
    }
    std::fs::write(dir.join("manifest.json"), m)
}
