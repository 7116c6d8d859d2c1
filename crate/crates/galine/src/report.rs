//! Machine-readable check reports.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// `{ "check", "samples", "violations", "seed" }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub samples: usize,
    pub violations: Vec<Value>,
    pub seed: u64,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, seed: u64) -> Self {
        CheckReport { check: check.into(), samples: 0, violations: Vec::new(), seed }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Counts one sample, recording `witness` if it failed.
    pub fn record(&mut self, witness: Option<Value>) {
        self.samples += 1;
        if let Some(w) = witness {
            self.violations.push(w);
        }
    }

    pub fn merge(mut self, other: CheckReport) -> Self {
        self.samples += other.samples;
        self.violations.extend(other.violations);
        self
    }
}
