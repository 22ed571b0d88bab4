//! Report records shared by all verbs. Floats are written as fixed-precision
//! strings so identical runs produce byte-identical files.

use serde::Serialize;

use arrfrob::scalar::format_f64;

pub const SCHEMA: &str = "arrfrob-report/1";

pub fn report_schema_version() -> &'static str {
    SCHEMA
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub identity: String,
    /// Formula the identity instantiates.
    pub formula: String,
    pub mode: &'static str,
    pub status: Status,
    /// Worst error over samples for numeric checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<String>,
}

impl CheckRecord {
    pub fn exact(identity: &str, formula: &str, witnesses: Vec<String>) -> Self {
        CheckRecord {
            identity: identity.into(),
            formula: formula.into(),
            mode: "exact",
            status: if witnesses.is_empty() {
                Status::Pass
            } else {
                Status::Fail
            },
            error: None,
            witnesses,
        }
    }

    pub fn numeric(
        identity: &str,
        formula: &str,
        error: f64,
        tol: f64,
        witnesses: Vec<String>,
    ) -> Self {
        let ok = error.is_finite() && error <= tol && witnesses.is_empty();
        CheckRecord {
            identity: identity.into(),
            formula: formula.into(),
            mode: "numeric",
            status: if ok { Status::Pass } else { Status::Fail },
            error: Some(format_f64(error)),
            witnesses,
        }
    }

    pub fn skipped(identity: &str, formula: &str, reason: String) -> Self {
        CheckRecord {
            identity: identity.into(),
            formula: formula.into(),
            mode: "exact",
            status: Status::Skipped,
            error: None,
            witnesses: vec![reason],
        }
    }

    pub fn failed_to_run(identity: &str, formula: &str, reason: String) -> Self {
        CheckRecord {
            identity: identity.into(),
            formula: formula.into(),
            mode: "exact",
            status: Status::Fail,
            error: None,
            witnesses: vec![reason],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRecord {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub schema: &'static str,
    pub family: String,
    pub seed: u64,
    pub tol: String,
    pub samples: usize,
    pub anchor: usize,
    pub suites: Vec<SuiteRecord>,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(
        family: String,
        seed: u64,
        tol: f64,
        samples: usize,
        anchor: usize,
        suites: Vec<SuiteRecord>,
    ) -> Self {
        let passed = suites
            .iter()
            .flat_map(|s| &s.checks)
            .all(|c| c.status != Status::Fail);
        CheckReport {
            schema: report_schema_version(),
            family,
            seed,
            tol: format_f64(tol),
            samples,
            anchor,
            suites,
            passed,
        }
    }
}

/// Wraps a verb-specific payload with the schema tag.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema: &'static str,
    pub family: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(family: String, body: T) -> Self {
        Envelope {
            schema: report_schema_version(),
            family,
            body,
        }
    }
}
