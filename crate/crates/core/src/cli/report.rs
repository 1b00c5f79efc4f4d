//! Reports and tables written by the runner.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Passes when `value < threshold`.
    Below,
    /// Passes when `value > threshold`.
    Above,
}

/// One named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::Below,
            threshold,
            pass: value < threshold,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::Above,
            threshold,
            pass: value > threshold,
        }
    }

    /// Adds a condition the comparison alone does not capture.
    pub fn and(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    /// Kind-specific results behind the verdicts.
    pub details: Value,
    /// File names relative to the scenario directory.
    pub artifacts: Vec<String>,
    pub wall_time: f64,
}

impl RunReport {
    pub fn failed_verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }
}

/// A CSV table: header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: &str, header: &[&str]) -> Self {
        Self {
            file_name: file_name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_path(dir.join(&self.file_name)).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits, scientific notation, independent of locale.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub config: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub failed_verdicts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub scenarios: Vec<SuiteEntry>,
    pub wall_time: f64,
}

impl SuiteReport {
    pub fn has_errors(&self) -> bool {
        self.scenarios.iter().any(|s| s.error.is_some())
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = format_float(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        for x in [1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 0.0, -7.25e12] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn verdict_relations() {
        assert!(Verdict::below("a", 1e-12, 1e-9).pass);
        assert!(!Verdict::below("a", 1e-9, 1e-9).pass);
        assert!(Verdict::above("b", 0.5, 0.1).pass);
        assert!(!Verdict::above("b", 0.5, 0.1).and(false).pass);
        assert!(!Verdict::below("c", f64::NAN, 1.0).pass);
    }
}
