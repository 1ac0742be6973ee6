//! Scenario output: tables, machine-checked assertions, CSV and JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

use super::config::ScenarioKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub values: Vec<f64>,
}

/// A labelled numeric table; the label column comes first in the CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub label_column: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(name: &str, label_column: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            label_column: label_column.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width mismatch in table {}", self.name);
        self.rows.push(Row { label: label.into(), values });
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column for the rows carrying `label`.
    pub fn series(&self, label: &str, column: &str) -> Vec<f64> {
        let Some(j) = self.column(column) else { return Vec::new() };
        self.rows.iter().filter(|r| r.label == label).map(|r| r.values[j]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.label_column);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.label);
            for v in &row.values {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// `value <relation> limit` checked with an explicit additive tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub relation: &'static str,
    pub value: f64,
    pub limit: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn le(name: impl Into<String>, value: f64, limit: f64, tolerance: f64) -> Self {
        let pass = value <= limit + tolerance;
        Self { name: name.into(), relation: "<=", value, limit, tolerance, pass }
    }

    pub fn ge(name: impl Into<String>, value: f64, limit: f64, tolerance: f64) -> Self {
        let pass = value >= limit - tolerance;
        Self { name: name.into(), relation: ">=", value, limit, tolerance, pass }
    }

    /// A boolean check, recorded as `value == 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), relation: "==", value: if ok { 1.0 } else { 0.0 }, limit: 1.0, tolerance: 0.0, pass: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scenario: ScenarioKind,
    /// The first table is the main per-refinement table.
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub runtime_ms: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: ScenarioKind,
    pass: bool,
    assertions: &'a [Assertion],
    notes: &'a [String],
    files: Vec<String>,
    runtime_ms: f64,
}

impl ScenarioResult {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self { scenario, tables: Vec::new(), assertions: Vec::new(), notes: Vec::new(), runtime_ms: 0.0 }
    }

    pub fn pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.pass).collect()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    fn file_name(&self, table: &Table, first: bool) -> String {
        if first {
            format!("{}.csv", self.scenario)
        } else {
            format!("{}_{}.csv", self.scenario, table.name)
        }
    }

    /// Writes one CSV per table and a JSON summary into `dir`.
    ///
    /// CSV bytes depend only on the configuration; the wall-clock runtime
    /// goes to the JSON summary alone.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (i, table) in self.tables.iter().enumerate() {
            let path = dir.join(self.file_name(table, i == 0));
            fs::write(&path, table.to_csv())?;
            written.push(path);
        }
        let summary = Summary {
            scenario: self.scenario,
            pass: self.pass(),
            assertions: &self.assertions,
            notes: &self.notes,
            files: written.iter().filter_map(|p| p.file_name()).map(|s| s.to_string_lossy().into_owned()).collect(),
            runtime_ms: self.runtime_ms,
        };
        let json_path = dir.join(format!("{}.json", self.scenario));
        fs::write(&json_path, serde_json::to_string_pretty(&summary)? + "\n")?;
        written.push(json_path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("main", "data", &["a", "b"]);
        t.push("x", vec![1.0, 0.5]);
        t.push("y", vec![f64::INFINITY, -2.0]);
        assert_eq!(t.to_csv(), "data,a,b\nx,1,0.5\ny,inf,-2\n");
        assert_eq!(t.series("x", "b"), vec![0.5]);
        assert!(t.series("x", "c").is_empty());
    }

    #[test]
    fn assertion_tolerances() {
        assert!(Assertion::le("a", 1.05, 1.0, 0.1).pass);
        assert!(!Assertion::le("a", 1.2, 1.0, 0.1).pass);
        assert!(Assertion::ge("b", 0.95, 1.0, 0.1).pass);
        assert!(!Assertion::ge("b", f64::NAN, 1.0, 0.1).pass);
        assert!(!Assertion::holds("c", false).pass);
    }

    #[test]
    fn writes_files() {
        let dir = std::env::temp_dir().join(format!("orlicz-lab-report-{}", std::process::id()));
        let mut res = ScenarioResult::new(ScenarioKind::Main0);
        let mut t = Table::new("main", "data", &["v"]);
        t.push("x", vec![1.0]);
        res.tables.push(t.clone());
        t.name = "extra".into();
        res.tables.push(t);
        res.assertions.push(Assertion::holds("ok", true));
        let files = res.write(&dir).unwrap();
        let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["main0.csv", "main0_extra.csv", "main0.json"]);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("main0.json")).unwrap()).unwrap();
        assert_eq!(json["pass"], true);
        assert_eq!(json["scenario"], "main0");
        fs::remove_dir_all(&dir).unwrap();
    }
}
