//! Structured experiment results: scalars, arrays, tables and verdicts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const REPORT_SCHEMA: &str = "qha-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Passes when `value < tolerance`.
    Below,
    /// Passes when `value > tolerance`.
    Above,
    /// Passes when `|value − expected| ≤ tolerance`.
    Near,
    /// A boolean check; `value` is 1 for pass, 0 for fail.
    Holds,
}

/// One pass/fail judgement and the tolerance it was judged against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub expected: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

impl Verdict {
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::build(name, value, Comparison::Below, tolerance, None, value < tolerance)
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::build(name, value, Comparison::Above, threshold, None, value > threshold)
    }

    pub fn near(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let ok = (value - expected).abs() <= tolerance;
        Self::build(name, value, Comparison::Near, tolerance, Some(expected), ok)
    }

    pub fn holds(name: impl Into<String>, passed: bool) -> Self {
        Self::build(name, if passed { 1.0 } else { 0.0 }, Comparison::Holds, 0.0, None, passed)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn build(
        name: impl Into<String>,
        value: f64,
        comparison: Comparison,
        tolerance: f64,
        expected: Option<f64>,
        passed: bool,
    ) -> Self {
        Self { name: name.into(), value, comparison, tolerance, expected, passed, detail: String::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
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

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match columns");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format!("{v:e}"),
                    Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub experiment: String,
    pub config: serde_json::Value,
    pub conventions: BTreeMap<String, serde_json::Value>,
    pub scalars: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
    pub arrays: BTreeMap<String, Vec<f64>>,
    pub tables: BTreeMap<String, Table>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            experiment: experiment.into(),
            config: serde_json::Value::Null,
            conventions: BTreeMap::new(),
            scalars: BTreeMap::new(),
            labels: BTreeMap::new(),
            arrays: BTreeMap::new(),
            tables: BTreeMap::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn scalar(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.scalars.insert(key.into(), v);
        self
    }

    pub fn label(&mut self, key: impl Into<String>, v: impl Into<String>) -> &mut Self {
        self.labels.insert(key.into(), v.into());
        self
    }

    pub fn array(&mut self, key: impl Into<String>, v: Vec<f64>) -> &mut Self {
        self.arrays.insert(key.into(), v);
        self
    }

    pub fn table(&mut self, key: impl Into<String>, t: Table) -> &mut Self {
        self.tables.insert(key.into(), t);
        self
    }

    pub fn verdict(&mut self, v: Verdict) -> &mut Self {
        self.verdicts.push(v);
        self
    }

    pub fn warn(&mut self, w: impl Into<String>) -> &mut Self {
        self.warnings.push(w.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failed_verdicts(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passed).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are serializable")
    }

    /// Writes `<experiment>.json` and one `<experiment>_<table>.csv` per table.
    pub fn write_files(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&json, self.to_json())?;
        written.push(json);
        for (name, table) in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.experiment, name));
            std::fs::write(&path, table.to_csv())?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_comparisons() {
        assert!(Verdict::below("a", 1e-9, 1e-8).passed);
        assert!(!Verdict::below("a", 1e-8, 1e-8).passed);
        assert!(Verdict::above("b", 0.6, 0.5).passed);
        assert!(Verdict::near("c", -1.0, -1.0, 0.0).passed);
        assert!(!Verdict::holds("d", false).passed);
    }

    #[test]
    fn json_round_trip_and_csv() {
        let mut r = ExperimentReport::new("demo");
        r.scalar("x", 0.5).array("a", vec![1.0, 2.0]).verdict(Verdict::below("x", 0.5, 1.0));
        let mut t = Table::new(&["name", "value"]);
        t.push(vec!["a,b".into(), 2.0.into()]);
        r.table("t", t.clone());
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(t.to_csv(), "name,value\n\"a,b\",2e0\n");
        assert!(r.passed());
    }
}
