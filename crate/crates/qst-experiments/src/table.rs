//! Column-labelled result tables, their CSV form and the JSON run summary.
//!
//! CSV files start with `#`-prefixed metadata lines followed by a header row
//! and the body. Only the metadata lines carry timings, so two runs of the
//! same configuration produce identical bodies.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{ExpError, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // shortest representation that round-trips
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        ResultTable {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; non-numeric cells are skipped.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(c) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match r[c] {
                Cell::Float(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
                _ => None,
            })
            .collect()
    }

    /// Header and rows, without metadata.
    pub fn csv_body(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let enc = |e: csv::Error| ExpError::Encode(e.to_string());
        w.write_record(&self.columns).map_err(enc)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(enc)?;
        }
        let bytes = w.into_inner().map_err(|e| ExpError::Encode(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| ExpError::Encode(e.to_string()))
    }
}

/// Provenance of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub experiment: &'static str,
    pub seed: u64,
    pub realizations: usize,
    pub config_hash: String,
    pub code_version: &'static str,
    pub wall_time_s: f64,
    pub threads: usize,
}

impl RunMetadata {
    pub fn new(kind: ExperimentKind, config: &ExperimentConfig, wall_time_s: f64) -> Result<Self> {
        Ok(RunMetadata {
            experiment: kind.name(),
            seed: config.seed,
            realizations: config.realizations,
            config_hash: config.hash()?,
            code_version: env!("CARGO_PKG_VERSION"),
            wall_time_s,
            threads: rayon::current_num_threads(),
        })
    }

    fn header_lines(&self, notes: &[String]) -> String {
        let mut s = format!(
            "# experiment: {}\n# seed: {}\n# realizations: {}\n# config_sha256: {}\n# code_version: {}\n# wall_time_s: {:.3}\n# threads: {}\n",
            self.experiment,
            self.seed,
            self.realizations,
            self.config_hash,
            self.code_version,
            self.wall_time_s,
            self.threads
        );
        for n in notes {
            s.push_str(&format!("# {n}\n"));
        }
        s
    }
}

/// Tables, free-form notes for the CSV headers and a JSON summary.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub tables: Vec<ResultTable>,
    pub notes: Vec<String>,
    pub summary: serde_json::Value,
}

impl Outcome {
    pub fn table(&self, name: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Writes `<dir>/<experiment>_<table>.csv` for every table and
/// `<dir>/<experiment>.json`; returns the paths written.
pub fn write_outcome(dir: &Path, meta: &RunMetadata, outcome: &Outcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| ExpError::io(dir, e))?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for t in &outcome.tables {
        let path = dir.join(format!("{}_{}.csv", meta.experiment, t.name));
        let mut text = meta.header_lines(&outcome.notes);
        text.push_str(&format!("# table: {}\n", t.name));
        text.push_str(&t.csv_body()?);
        std::fs::write(&path, text).map_err(|e| ExpError::io(&path, e))?;
        files.push(serde_json::json!({
            "table": t.name,
            "file": path.file_name().map(|f| f.to_string_lossy().into_owned()),
            "rows": t.rows.len(),
        }));
        written.push(path);
    }
    let sidecar = serde_json::json!({
        "metadata": meta,
        "notes": outcome.notes,
        "tables": files,
        "summary": outcome.summary,
    });
    let path = dir.join(format!("{}.json", meta.experiment));
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| ExpError::Encode(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| ExpError::io(&path, e))?;
    written.push(path);
    Ok(written)
}
