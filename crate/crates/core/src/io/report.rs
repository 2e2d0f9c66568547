use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl CheckResult {
    /// Passes iff `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }

    /// Passes iff `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value >= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub invalid_input: bool,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
            invalid_input: e.is_invalid_input(),
        }
    }
}

/// Machine-readable outcome of one CLI job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub command: String,
    pub inputs: serde_json::Value,
    pub tolerances: BTreeMap<String, f64>,
    pub conventions: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub checks: Vec<CheckResult>,
    pub results: serde_json::Value,
    pub error: Option<ErrorReport>,
    pub passed: bool,
    pub wall_time_s: f64,
}

impl JobReport {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            inputs: serde_json::Value::Null,
            tolerances: BTreeMap::new(),
            conventions: BTreeMap::new(),
            seed: None,
            checks: Vec::new(),
            results: serde_json::Value::Null,
            error: None,
            passed: true,
            wall_time_s: 0.0,
        }
    }

    pub fn check(&mut self, check: CheckResult) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn fail_with(&mut self, e: &Error) {
        self.error = Some(e.into());
        self.passed = false;
    }

    pub fn exit_code(&self) -> i32 {
        match &self.error {
            Some(e) if e.invalid_input => EXIT_INVALID_INPUT,
            Some(_) => EXIT_CHECK_FAILED,
            None if self.passed => EXIT_PASS,
            None => EXIT_CHECK_FAILED,
        }
    }
}
