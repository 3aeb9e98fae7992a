//! Report emission: one JSON document and one CSV table per experiment
//! run.  Content depends only on the resolved configuration and seed, so
//! repeated runs produce byte-identical files; the timestamp appears only
//! in the file names.

use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

pub struct Report {
    pub experiment: &'static str,
    pub config: BTreeMap<String, String>,
    pub results: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, Value>,
    pub passed: bool,
    pub csv_header: String,
    pub csv_rows: Vec<String>,
}

impl Report {
    pub fn new(experiment: &'static str, config: &BTreeMap<String, String>) -> Self {
        Report {
            experiment,
            config: config.clone(),
            results: BTreeMap::new(),
            residuals: BTreeMap::new(),
            passed: true,
            csv_header: String::new(),
            csv_rows: Vec::new(),
        }
    }

    pub fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }

    pub fn residual(&mut self, key: &str, v: f64) {
        self.residuals.insert(key.to_string(), num(v));
    }

    /// Record a named gate: the report fails if the condition does not
    /// hold, and the condition's value is stored alongside the results.
    pub fn gate(&mut self, key: &str, ok: bool) {
        self.results.insert(format!("gate.{key}"), Value::Bool(ok));
        self.passed &= ok;
    }

    pub fn csv_row(&mut self, cells: &[CsvCell]) {
        self.csv_rows
            .push(cells.iter().map(CsvCell::render).collect::<Vec<_>>().join(","));
    }

    pub fn json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "results": self.results,
            "residuals": self.residuals,
            "passed": self.passed,
        })
    }

    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.csv_rows.len() + 1));
        out.push_str(&self.csv_header);
        out.push('\n');
        for row in &self.csv_rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }

    /// Write `<dir>/<experiment>-<stamp>.{json,csv}` and return the paths.
    pub fn write(&self, dir: &Path, stamp: &str) -> io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let base = format!("{}-{stamp}", self.experiment);
        let json_path = dir.join(format!("{base}.json"));
        let csv_path = dir.join(format!("{base}.csv"));
        let mut doc = serde_json::to_string_pretty(&self.json()).expect("report serializes");
        doc.push('\n');
        std::fs::write(&json_path, doc)?;
        std::fs::write(&csv_path, self.csv())?;
        Ok((json_path, csv_path))
    }
}

/// JSON number that survives infinities (JSON itself has none).
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        match serde_json::Number::from_f64(x) {
            Some(n) => Value::Number(n),
            None => Value::String(format!("{x}")),
        }
    } else if x.is_nan() {
        Value::String("nan".to_string())
    } else if x > 0.0 {
        Value::String("inf".to_string())
    } else {
        Value::String("-inf".to_string())
    }
}

pub fn num_list(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Typed CSV cell; numbers render with 17 significant digits.
pub enum CsvCell {
    Int(u64),
    Num(f64),
    Text(&'static str),
}

impl CsvCell {
    fn render(&self) -> String {
        match self {
            CsvCell::Int(v) => v.to_string(),
            CsvCell::Num(v) => format!("{v:.16e}"),
            CsvCell::Text(s) => s.to_string(),
        }
    }
}
