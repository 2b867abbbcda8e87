//! Report records shared by all checks.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// One named measurement. `pass` is None for diagnostics that carry no verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub residual: f64,
    pub threshold: f64,
    #[serde(default)]
    pub constant: Option<f64>,
    pub pass: Option<bool>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn verdict(check: impl Into<String>, residual: f64, threshold: f64) -> Self {
        CheckResult {
            check: check.into(),
            residual,
            threshold,
            constant: None,
            pass: Some(residual.is_finite() && residual < threshold),
            warnings: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn diagnostic(check: impl Into<String>, residual: f64, threshold: f64) -> Self {
        CheckResult { pass: None, ..Self::verdict(check, residual, threshold) }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }

    pub fn with_warnings(mut self, w: impl IntoIterator<Item = String>) -> Self {
        self.warnings.extend(w);
        self
    }

    pub fn with_note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.pass != Some(false)
    }
}

/// True when no verdict-bearing check failed.
pub fn all_pass(checks: &[CheckResult]) -> bool {
    checks.iter().all(CheckResult::passed)
}

pub fn failing(checks: &[CheckResult]) -> Vec<&str> {
    checks.iter().filter(|c| !c.passed()).map(|c| c.check.as_str()).collect()
}
