//! Structured report (`polyspec-report/1` JSON) and its flat CSV export.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::BoundCheck;
use crate::eigensolve::SolveMethod;

use super::config::{CheckName, RunConfig};
use super::HarnessError;

pub const SCHEMA: &str = "polyspec-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The run stopped early (solver failure); see `failure`.
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub points_per_axis: Vec<usize>,
    pub interior_points: usize,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub method: SolveMethod,
    /// `max |⟨v_i, v_j⟩ - δ_ij|` over the retained eigenvectors.
    pub orthonormality_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValues {
    pub name: String,
    pub eigenvalues: Vec<f64>,
}

/// All rows produced by one enabled check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckGroup {
    pub check: CheckName,
    pub passed: bool,
    pub applicable: bool,
    /// Why the check could not run, if it could not.
    pub reason: Option<String>,
    pub rows: Vec<BoundCheck>,
}

impl CheckGroup {
    pub fn from_rows(check: CheckName, rows: Vec<BoundCheck>) -> Self {
        let applicable = rows.iter().any(|r| r.applicable);
        let reason = if applicable {
            None
        } else if rows.is_empty() {
            Some("no rows to evaluate".to_string())
        } else {
            Some(rows[0].notes.clone())
        };
        Self {
            check,
            passed: rows.iter().all(BoundCheck::passes),
            applicable,
            reason,
            rows,
        }
    }

    pub fn inapplicable(check: CheckName, reason: impl Into<String>) -> Self {
        Self {
            check,
            passed: true,
            applicable: false,
            reason: Some(reason.into()),
            rows: Vec::new(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.rows.iter().filter(|r| !r.passes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub toolkit_version: String,
    /// RFC 3339; the only field allowed to differ between identical runs.
    pub timestamp: String,
    pub config: RunConfig,
    pub grid: GridSummary,
    pub spectrum: Option<SpectrumSummary>,
    pub oracle: Option<OracleValues>,
    pub checks: Vec<CheckGroup>,
    pub verdict: Verdict,
    pub failure: Option<String>,
}

impl VerificationReport {
    pub fn group(&self, check: CheckName) -> Option<&CheckGroup> {
        self.checks.iter().find(|g| g.check == check)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let report: Self = serde_json::from_str(text).map_err(|e| HarnessError::Report(e.to_string()))?;
        if report.schema != SCHEMA {
            return Err(HarnessError::Report(format!("unsupported schema '{}'", report.schema)));
        }
        Ok(report)
    }

    /// The JSON document with the timestamp blanked.
    pub fn body_json(&self) -> String {
        let mut copy = self.clone();
        copy.timestamp.clear();
        copy.to_json()
    }

    pub fn to_csv(&self) -> String {
        groups_to_csv(&self.checks)
    }

    /// Writes `<prefix>.json` and `<prefix>.csv`, creating parent directories.
    pub fn write(&self, prefix: &str) -> Result<(PathBuf, PathBuf), HarnessError> {
        let json = PathBuf::from(format!("{prefix}.json"));
        let csv = PathBuf::from(format!("{prefix}.csv"));
        if let Some(parent) = Path::new(prefix).parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| HarnessError::Io(e.to_string()))?;
        }
        std::fs::write(&json, self.to_json()).map_err(|e| HarnessError::Io(e.to_string()))?;
        std::fs::write(&csv, self.to_csv()).map_err(|e| HarnessError::Io(e.to_string()))?;
        Ok((json, csv))
    }

    /// One line per check group, then the verdict.
    pub fn summary(&self) -> String {
        let mut out = summarize_groups(&self.checks);
        if let Some(f) = &self.failure {
            out.push_str(&format!("aborted: {f}\n"));
        }
        out.push_str(&format!("verdict: {:?}\n", self.verdict));
        out
    }
}

/// One line per group: status, check name, row count and failures.
pub fn summarize_groups(groups: &[CheckGroup]) -> String {
    let mut out = String::new();
    for g in groups {
        let status = match (g.applicable, g.passed) {
            (false, _) => "n/a ",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        let failed = g.failures().count();
        let name = serde_json::to_value(g.check).expect("check names serialize");
        out.push_str(&format!(
            "{status} {:<15} {:>6} rows{}\n",
            name.as_str().unwrap_or_default(),
            g.rows.len(),
            if failed > 0 { format!(", {failed} failed") } else { String::new() }
        ));
    }
    out
}

/// Flat CSV of every row in `groups`.
pub fn groups_to_csv(groups: &[CheckGroup]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for g in groups {
        for r in &g.rows {
            w.serialize(CsvRow::new(g.check, r)).expect("row serializes");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check: CheckName,
    name: &'a str,
    source: &'a str,
    k: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
    lhs: f64,
    rhs: f64,
    margin: f64,
    holds: bool,
    applicable: bool,
    repeated_eigenvalues: bool,
    notes: &'a str,
}

impl<'a> CsvRow<'a> {
    fn new(check: CheckName, r: &'a BoundCheck) -> Self {
        Self {
            check,
            name: &r.name,
            source: &r.source,
            k: r.k,
            alpha: r.alpha,
            beta: r.beta,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            holds: r.holds,
            applicable: r.applicable,
            repeated_eigenvalues: r.repeated_eigenvalues,
            notes: &r.notes,
        }
    }
}
