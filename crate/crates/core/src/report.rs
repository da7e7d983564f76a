//! Named pass/fail check lines and the report structures built from them.
//!
//! Table revalidation and certificate verification both produce the same
//! shape: a flat list of named checks, optionally grouped per row, with an
//! overall verdict that is the conjunction of every line.

use serde::{Deserialize, Serialize};

/// One named check with its outcome and a human-readable detail string.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        CheckLine {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// Checks attached to one table or certificate row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowReport {
    pub row: usize,
    pub checks: Vec<CheckLine>,
}

impl RowReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Outcome of validating one table or verifying one certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    /// What was checked ("cover", "addcong", "thm2", ...).
    pub label: String,
    /// Per-row check groups, in row order.
    pub rows: Vec<RowReport>,
    /// Checks that concern the object as a whole.
    pub checks: Vec<CheckLine>,
    /// Conjunction of every check line.
    pub passed: bool,
}

impl Report {
    pub fn new(label: &str) -> Self {
        Report {
            label: label.to_string(),
            rows: Vec::new(),
            checks: Vec::new(),
            passed: false,
        }
    }

    /// Recomputes the overall verdict from the accumulated lines.
    pub fn finalize(mut self) -> Self {
        self.passed =
            self.rows.iter().all(RowReport::passed) && self.checks.iter().all(|c| c.pass);
        self
    }

    /// All failing check lines, prefixed by their row.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            for c in &r.checks {
                if !c.pass {
                    out.push(format!("row {}: {} ({})", r.row, c.name, c.detail));
                }
            }
        }
        for c in &self.checks {
            if !c.pass {
                out.push(format!("{}: {} ({})", self.label, c.name, c.detail));
            }
        }
        out
    }

    /// Total number of check lines across rows and whole-object checks.
    pub fn check_count(&self) -> usize {
        self.rows.iter().map(|r| r.checks.len()).sum::<usize>() + self.checks.len()
    }
}
