//! Tables, CSV / JSONL rendering and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
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

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
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

/// Seventeen significant digits, locale independent.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) if !v.is_finite() => Value::String(format_float(*v)),
            Cell::Empty => Value::Null,
            c => serde_json::to_value(c).expect("cell serializes"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match the header"
        );
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Vec<Cell>>) {
        for r in rows {
            self.push(r);
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_jsonl(&self, experiment: &str) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let mut obj = Map::new();
            obj.insert("experiment".into(), Value::String(experiment.into()));
            for (c, v) in self.columns.iter().zip(r) {
                obj.insert(c.clone(), v.json());
            }
            out.push_str(&Value::Object(obj).to_string());
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format, experiment: &str) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Jsonl => self.to_jsonl(experiment),
        }
    }
}

/// A named hard assertion of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn build_id() -> String {
    format!("nk-lab-{}", env!("CARGO_PKG_VERSION"))
}

pub fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Self-describing summary of one run; re-runnable from `config` alone.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub timestamp: u64,
    pub build_id: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub data_file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub build_id: String,
    pub timestamp: u64,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `files` (name, contents) into `dir` plus a `MANIFEST.json` listing
/// them with their hashes. Returns the written paths, manifest last.
pub fn write_bundle(dir: &Path, files: &[(String, Vec<u8>)]) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths = Vec::new();
    let mut entries = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        entries.push(ManifestEntry {
            path: name.clone(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        paths.push(path);
    }
    let manifest = Manifest {
        build_id: build_id(),
        timestamp: timestamp(),
        files: entries,
    };
    let path = dir.join("MANIFEST.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .map_err(|e| CliError::io(&path, e))?;
    paths.push(path);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        for x in [std::f64::consts::PI, 1e-300, 6.02e23, -0.0] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_and_jsonl() {
        let mut t = Table::new(&["n", "x", "label", "ok", "gap"]);
        t.push(vec![
            4usize.into(),
            0.5.into(),
            "a,b".into(),
            true.into(),
            Cell::Empty,
        ]);
        assert_eq!(
            t.to_csv(),
            "n,x,label,ok,gap\n4,5.0000000000000000e-1,\"a,b\",true,\n"
        );
        assert_eq!(
            t.to_jsonl("e"),
            "{\"experiment\":\"e\",\"n\":4,\"x\":0.5,\"label\":\"a,b\",\"ok\":true,\"gap\":null}\n"
        );
    }

    #[test]
    fn bundle_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_bundle(dir.path(), &[("a.csv".into(), b"x\n1\n".to_vec())]).unwrap();
        let manifest: Value =
            serde_json::from_str(&fs::read_to_string(&paths[1]).unwrap()).unwrap();
        assert_eq!(manifest["files"][0]["sha256"], sha256_hex(b"x\n1\n"));
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
