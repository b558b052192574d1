//! Tables, their CSV/JSON rendering, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// One table cell. Reals render with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Real(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::Value::from(*v as i64),
            Cell::Real(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(format_real(*v))),
            Cell::Text(s) => serde_json::Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v as i128)
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

/// `{:.16e}`: 17 significant digits, `.` separator.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| self.columns.iter().map(|c| c.to_string()).zip(row.iter().map(Cell::to_json)).collect())
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Metadata written next to every output table.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub build_id: String,
    pub rng: String,
    pub started: String,
    pub finished: String,
    pub output_files: Vec<String>,
    pub notes: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            parameters: BTreeMap::new(),
            seed,
            build_id: crate::BUILD_ID.to_string(),
            rng: tml_core::RNG_ALGORITHM.to_string(),
            started: now(),
            finished: String::new(),
            output_files: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.insert(key.to_string(), value.to_string());
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Writes each `(stem, table)` as `<dir>/<stem>.<ext>`, then the manifest as
/// `<dir>/<subcommand>.manifest.json`. Returns the table paths.
pub fn write_run(
    dir: &Path,
    tables: &[(String, Table)],
    format: Format,
    manifest: &mut RunManifest,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (stem, table) in tables {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        fs::write(&path, table.render(format))?;
        manifest.output_files.push(path.display().to_string());
        written.push(path);
    }
    manifest.finished = now();
    let path = dir.join(format!("{}.manifest.json", manifest.subcommand));
    let mut body = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_have_seventeen_digits() {
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
        assert_eq!(format_real(-0.1), "-1.0000000000000001e-1");
        assert_eq!(format_real(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(&["n", "value", "label"]);
        t.push(vec![3usize.into(), 0.5.into(), "a,b".into()]);
        assert_eq!(t.to_csv(), "n,value,label\n3,5.0000000000000000e-1,\"a,b\"\n");
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["n"], 3);
        assert_eq!(v[0]["value"], 0.5);
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("demo", Some(4));
        m.param("n", 3);
        let mut t = Table::new(&["x"]);
        t.push(vec![1usize.into()]);
        let files = write_run(dir.path(), &[("demo".into(), t)], Format::Csv, &mut m).unwrap();
        assert_eq!(files.len(), 1);
        let text = fs::read_to_string(dir.path().join("demo.manifest.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["seed"], 4);
        assert_eq!(v["parameters"]["n"], "3");
        assert_eq!(v["output_files"].as_array().unwrap().len(), 1);
        assert!(!v["build_id"].as_str().unwrap().is_empty());
    }
}
