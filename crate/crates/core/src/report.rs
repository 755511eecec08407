//! Machine-readable verification reports.
//!
//! Schema: `{"suite": str, "params": obj, "cases": [{"name", "status",
//! "measured", "bound", "details"}], "meta": obj}`.  Keys are sorted and no
//! wall time is recorded, so reports from identical seeds and flags are
//! byte-identical.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{KsError, Result};

/// Verdict of a single verification case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    /// The measured value satisfies its bound.
    Pass,
    /// The bound is violated.
    Fail,
    /// The grid resolution cannot decide the question.
    Indeterminate,
}

/// One measured case inside a suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseResult {
    /// Case name (reports sort cases by it).
    pub name: String,
    /// Verdict.
    pub status: CaseStatus,
    /// The measured quantity.
    pub measured: f64,
    /// The bound it was compared against, if any.
    pub bound: Option<f64>,
    /// Free-form extra data.
    pub details: Value,
}

impl CaseResult {
    /// A case that passes iff `measured <= bound`.
    pub fn bounded(name: &str, measured: f64, bound: f64) -> Self {
        CaseResult {
            name: name.to_string(),
            status: if measured <= bound && measured.is_finite() {
                CaseStatus::Pass
            } else {
                CaseStatus::Fail
            },
            measured,
            bound: Some(bound),
            details: json!({}),
        }
    }

    /// A case with a boolean verdict and a recorded measurement.
    pub fn flag(name: &str, ok: bool, measured: f64) -> Self {
        CaseResult {
            name: name.to_string(),
            status: if ok { CaseStatus::Pass } else { CaseStatus::Fail },
            measured,
            bound: None,
            details: json!({}),
        }
    }

    /// Attaches detail data.
    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

/// A full suite report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDoc {
    /// Suite name.
    pub suite: String,
    /// Input parameters (grid, seed, sizes, ...).
    pub params: Map<String, Value>,
    /// Measured cases, sorted by name.
    pub cases: Vec<CaseResult>,
    /// Toolkit metadata.
    pub meta: Map<String, Value>,
}

impl ReportDoc {
    /// Creates an empty report with standard metadata.
    pub fn new(suite: &str, params: Value) -> Self {
        let params = match params {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        let mut meta = Map::new();
        meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        meta.insert("rng".into(), json!(crate::testfields::RNG_NAME));
        ReportDoc {
            suite: suite.to_string(),
            params,
            cases: Vec::new(),
            meta,
        }
    }

    /// Appends a case.
    pub fn push(&mut self, case: CaseResult) {
        self.cases.push(case);
    }

    /// Sorts cases by name (call once after the suite finishes).
    pub fn finish(&mut self) {
        self.cases.sort_by(|a, b| a.name.cmp(&b.name));
    }

    /// True when every case passed.
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.status == CaseStatus::Pass)
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&serde_json::to_value(self).map_err(badjson)?)
            .map_err(badjson)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a report back from JSON.
    pub fn from_json(text: &str) -> Result<ReportDoc> {
        serde_json::from_str(text)
            .map_err(|e| KsError::Format(format!("not a valid report document: {e}")))
    }
}

fn badjson(e: serde_json::Error) -> KsError {
    KsError::Format(format!("report serialization failed: {e}"))
}

/// Merges several reports into one document: cases are concatenated with a
/// `suite` provenance field, sorted by `(suite, name)`.  Conflicting toolkit
/// versions are recorded as a warning in the merged metadata.
pub fn merge(reports: &[ReportDoc]) -> Result<Value> {
    if reports.is_empty() {
        return Err(KsError::Format("nothing to merge".into()));
    }
    let mut cases = Vec::new();
    let mut versions: Vec<String> = Vec::new();
    for r in reports {
        if let Some(Value::String(v)) = r.meta.get("version") {
            if !versions.contains(v) {
                versions.push(v.clone());
            }
        }
        for c in &r.cases {
            let mut v = serde_json::to_value(c).map_err(badjson)?;
            if let Value::Object(m) = &mut v {
                m.insert("suite".into(), json!(r.suite));
            }
            cases.push(v);
        }
    }
    cases.sort_by(|a, b| {
        let key = |v: &Value| {
            (
                v["suite"].as_str().unwrap_or("").to_string(),
                v["name"].as_str().unwrap_or("").to_string(),
            )
        };
        key(a).cmp(&key(b))
    });
    let mut meta = Map::new();
    meta.insert("versions".into(), json!(versions));
    if versions.len() > 1 {
        meta.insert(
            "warning".into(),
            json!("merged reports come from different toolkit versions"),
        );
    }
    Ok(json!({ "cases": cases, "meta": meta, "suites": reports.iter().map(|r| r.suite.clone()).collect::<Vec<_>>() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_round_trip_and_sort_deterministically() {
        let mut r = ReportDoc::new("demo", json!({"n": 8}));
        r.push(CaseResult::bounded("zeta", 1.0, 2.0));
        r.push(CaseResult::flag("alpha", true, 0.5));
        r.finish();
        assert_eq!(r.cases[0].name, "alpha");
        assert!(r.passed());
        let s1 = r.to_json().unwrap();
        let s2 = ReportDoc::from_json(&s1).unwrap().to_json().unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn merge_concatenates_with_provenance() {
        let mut a = ReportDoc::new("a", json!({}));
        a.push(CaseResult::bounded("x", 0.0, 1.0));
        let mut b = ReportDoc::new("b", json!({}));
        b.push(CaseResult::bounded("y", 3.0, 1.0));
        let m = merge(&[a, b]).unwrap();
        assert_eq!(m["cases"].as_array().unwrap().len(), 2);
        assert_eq!(m["cases"][0]["suite"], "a");
        assert_eq!(m["cases"][1]["status"], "fail");
    }
}
