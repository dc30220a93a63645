//! Check reports shared by the library drivers, the CLI and the
//! acceptance harness.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub total: usize,
    pub failures: usize,
    /// First failing instance, if any.
    pub witness: Option<Value>,
    pub details: Value,
}

impl CheckReport {
    pub fn new(check: impl Into<String>) -> Self {
        CheckReport {
            check: check.into(),
            status: Status::Pass,
            total: 0,
            failures: 0,
            witness: None,
            details: Value::Null,
        }
    }

    /// Records one instance. The first failure becomes the witness.
    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.total += 1;
        if !ok {
            self.failures += 1;
            self.status = Status::Fail;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    pub fn fail(&mut self, witness: Value) {
        self.record(false, || witness);
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Merges another report's counts into this one.
    pub fn absorb(&mut self, o: &CheckReport) {
        self.total += o.total;
        self.failures += o.failures;
        if !o.passed() {
            self.status = Status::Fail;
            if self.witness.is_none() {
                self.witness = o.witness.clone();
            }
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} ({}/{} ok)",
            self.check,
            if self.passed() { "pass" } else { "FAIL" },
            self.total - self.failures,
            self.total
        )
    }
}
