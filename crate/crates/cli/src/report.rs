use std::collections::BTreeMap;

use serde::Serialize;

/// One named pass/fail check with the numbers behind it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub notes: String,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed,
            measured: finite(measured),
            bound: finite(bound),
            notes: String::new(),
        }
    }

    /// Passes when `measured ≥ bound`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured >= bound, measured, bound)
    }

    /// Passes when `measured ≤ bound`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured <= bound, measured, bound)
    }

    /// Passes when `measured > 0`.
    pub fn positive(name: impl Into<String>, measured: f64) -> Self {
        Self::new(name, measured > 0.0, measured, 0.0)
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            passed,
            measured: None,
            bound: None,
            notes: String::new(),
        }
    }

    /// A size guard refused the instance; not counted as a failure.
    pub fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            measured: None,
            bound: None,
            notes: format!("skipped: {}", why.into()),
        }
    }

    /// Informational only.
    pub fn logged(name: impl Into<String>, measured: f64) -> Self {
        let mut c = Self::new(name, true, measured, f64::NAN);
        c.notes = "report only".into();
        c
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub total_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: serde_json::Value,
    /// Derived constants used in the assertions, by name.
    pub constants: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub summary: Summary,
    /// Command-specific results, e.g. a full pairing report.
    pub data: Option<serde_json::Value>,
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(config: serde_json::Value, checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.passed).count();
        Self {
            tool: "discrepancy",
            version: env!("CARGO_PKG_VERSION"),
            config,
            constants: crate::suites::constant_ledger(),
            summary: Summary {
                total: checks.len(),
                passed,
                failed: checks.len() - passed,
            },
            checks,
            data: None,
            timing: None,
        }
    }

    pub fn with_data(mut self, data: serde_json::Value) -> Self {
        self.data = Some(data);
        self
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
