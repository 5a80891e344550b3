//! Named pass/fail checks and the versioned report envelope.

use std::collections::BTreeMap;

use serde::Serialize;

/// Outcome of one named check. Counts use a sorted map so serialization is stable.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub counts: BTreeMap<String, i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), pass, counts: BTreeMap::new(), detail: None }
    }

    pub fn count(mut self, key: &str, v: impl TryInto<i64>) -> Self {
        self.counts.insert(key.to_string(), v.try_into().unwrap_or(i64::MAX));
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

/// A suite's checks plus its configuration echo.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: &str, config: BTreeMap<String, String>, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.to_string(), config, checks, pass }
    }
}

/// Top-level report document.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub schema: u32,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
}

impl Report {
    pub fn new(suites: Vec<SuiteReport>) -> Self {
        let pass = suites.iter().all(|s| s.pass);
        Report { schema: 1, suites, pass }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
