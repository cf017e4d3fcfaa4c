//! Checks, JSON summaries, artifact files and the human-readable report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Inclusive bounds; a missing side is unbounded.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = value.is_finite() && lower.is_none_or(|l| value >= l) && upper.is_none_or(|u| value <= u);
        Self { name: name.into(), value, lower, upper, passed }
    }

    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, None, Some(limit))
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, Some(limit), None)
    }

    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self::new(name, value, Some(lower), Some(upper))
    }

    pub fn bound_text(&self) -> String {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => format!("[{l:.3e}, {u:.3e}]"),
            (Some(l), None) => format!(">= {l:.3e}"),
            (None, Some(u)) => format!("<= {u:.3e}"),
            (None, None) => "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: String,
    pub checks: Vec<Check>,
    /// Measured quantities that are reported but not gated.
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub elapsed_seconds: f64,
}

impl ScenarioReport {
    pub fn new(scenario: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Table of checks followed by metrics.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "== {} [{verdict}] ({:.1} s)", self.scenario, self.elapsed_seconds);
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
        for c in &self.checks {
            let mark = if c.passed { "pass" } else { "FAIL" };
            let _ = writeln!(s, "  {mark}  {:<width$}  {:>12.4e}  {}", c.name, c.value, c.bound_text());
        }
        if !self.metrics.is_empty() {
            let _ = writeln!(s, "  metrics:");
            for (k, v) in &self.metrics {
                let _ = writeln!(s, "        {k:<width$}  {v:>12.4e}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}

/// Output directory for one scenario; without a directory nothing is written.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    dir: Option<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir })
    }

    pub fn none() -> Self {
        Self { dir: None }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Runs `write` on a buffered file `name` inside the directory, if any.
    pub fn file(
        &self,
        name: &str,
        write: impl FnOnce(BufWriter<File>) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            write(BufWriter::new(File::create(d.join(name))?))?;
        }
        Ok(())
    }

    pub fn summary(&self, report: &ScenarioReport) -> Result<(), CliError> {
        self.file("summary.json", |w| Ok(serde_json::to_writer_pretty(w, report)?))
    }
}

/// Loads every `summary.json` in `dir` and its immediate subdirectories.
pub fn collect_reports(dir: &Path) -> Result<Vec<ScenarioReport>, CliError> {
    let mut paths = Vec::new();
    let direct = dir.join("summary.json");
    if direct.is_file() {
        paths.push(direct);
    }
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Report(format!("{}: {e}", dir.display())))?;
    let mut subdirs: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    subdirs.sort();
    paths.extend(subdirs.into_iter().map(|p| p.join("summary.json")).filter(|p| p.is_file()));
    if paths.is_empty() {
        return Err(CliError::Report(format!("no summary.json under {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| CliError::Report(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Text report over all summaries found under `dir`.
pub fn emit_report(dir: &Path) -> Result<(String, bool), CliError> {
    let reports = collect_reports(dir)?;
    let mut out = String::new();
    for r in &reports {
        out.push_str(&r.render());
    }
    let all = reports.iter().all(ScenarioReport::passed);
    let _ = writeln!(out, "{} scenario(s), overall {}", reports.len(), if all { "PASS" } else { "FAIL" });
    Ok((out, all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_bounds() {
        assert!(Check::below("a", 1.0, 2.0).passed);
        assert!(!Check::below("a", f64::NAN, 2.0).passed);
        assert!(!Check::above("a", 1.0, 2.0).passed);
        assert!(Check::within("a", 3.0, 2.5, 3.5).passed);
        assert!(!Check::within("a", 3.6, 2.5, 3.5).passed);
    }

    #[test]
    fn report_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_report(dir.path()).is_err());
        let sub = dir.path().join("identities");
        let art = Artifacts::new(Some(sub)).unwrap();
        let mut r = ScenarioReport::new("identities");
        r.check(Check::below("residual", 1e-12, 1e-8));
        r.metric("points", 3.0);
        art.summary(&r).unwrap();
        let (text, ok) = emit_report(dir.path()).unwrap();
        assert!(ok);
        assert!(text.contains("identities [PASS]") && text.contains("residual"));
    }
}
