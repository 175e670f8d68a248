//! Line-delimited JSON reports: one record per check, then a summary.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::spec::Expectation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Declared as expected to fail, and it did.
    ExpectedFail,
    /// Declared as expected to fail, but it passed.
    UnexpectedPass,
}

impl Status {
    pub fn from_outcome(within: bool, expect: Expectation) -> Self {
        match (within, expect) {
            (true, Expectation::Pass) => Status::Pass,
            (false, Expectation::Pass) => Status::Fail,
            (false, Expectation::Fail) => Status::ExpectedFail,
            (true, Expectation::Fail) => Status::UnexpectedPass,
        }
    }

    pub fn ok(self) -> bool {
        matches!(self, Status::Pass | Status::ExpectedFail)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub status: Status,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    /// Deviations that are not finite never pass.
    pub fn new(check: &str, max_deviation: f64, tolerance: f64, points: usize, expect: Expectation) -> Self {
        let within = max_deviation.is_finite() && max_deviation <= tolerance;
        Self {
            check: check.to_string(),
            status: Status::from_outcome(within, expect),
            max_deviation,
            tolerance,
            points,
            detail: None,
        }
    }

    pub fn failed(check: &str, detail: String) -> Self {
        Self {
            check: check.to_string(),
            status: Status::Fail,
            max_deviation: f64::NAN,
            tolerance: 0.0,
            points: 0,
            detail: Some(detail),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub digest: String,
    pub grid: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub checks: Vec<CheckRecord>,
    /// Command-specific records (iterations, parameters, ...), printed
    /// before the checks.
    pub extra: Vec<Value>,
    pub elapsed_ms: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Report {
    pub fn new(command: &str, input: &[u8]) -> Self {
        Self {
            command: command.to_string(),
            digest: sha256_hex(input),
            grid: None,
            seed: None,
            checks: Vec::new(),
            extra: Vec::new(),
            elapsed_ms: None,
        }
    }

    pub fn ok(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.status.ok())
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn summary(&self) -> Value {
        let passed = self.checks.iter().filter(|c| c.status.ok()).count();
        let mut v = json!({
            "record": "summary",
            "tool": "framegr",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "input_sha256": self.digest,
            "grid": self.grid,
            "seed": self.seed,
            "checks": self.checks.len(),
            "passed": passed,
            "failed": self.checks.len() - passed,
            "ok": self.ok(),
        });
        if let Some(ms) = self.elapsed_ms {
            v["elapsed_ms"] = json!(ms);
        }
        v
    }

    pub fn write_to(&self, out: &mut dyn Write) -> io::Result<()> {
        for e in &self.extra {
            writeln!(out, "{e}")?;
        }
        for c in &self.checks {
            let mut v = serde_json::to_value(c).map_err(io::Error::other)?;
            v["record"] = json!("check");
            writeln!(out, "{v}")?;
        }
        writeln!(out, "{}", self.summary())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}
