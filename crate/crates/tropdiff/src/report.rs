//! Validation reports: one record per check and location, with exact
//! witness values.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check could not be decided at the stored precision (for example
    /// a residue that is zero to precision but not exactly zero).
    Indeterminate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Entry {
    pub check: String,
    pub location: String,
    pub status: Status,
    /// Named exact values sufficient to recheck the condition by hand.
    pub witnesses: Vec<(String, String)>,
}

/// An ordered list of check results. Construction order is deterministic
/// for fixed input, so serialized reports are byte-identical across runs.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<Entry>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport::default()
    }

    pub fn push(
        &mut self,
        check: &str,
        location: &str,
        status: Status,
        witnesses: Vec<(String, String)>,
    ) {
        self.entries.push(Entry {
            check: check.to_string(),
            location: location.to_string(),
            status,
            witnesses,
        });
    }

    pub fn pass(&mut self, check: &str, location: &str, witnesses: Vec<(String, String)>) {
        self.push(check, location, Status::Pass, witnesses);
    }

    pub fn fail(&mut self, check: &str, location: &str, witnesses: Vec<(String, String)>) {
        self.push(check, location, Status::Fail, witnesses);
    }

    pub fn indeterminate(&mut self, check: &str, location: &str, witnesses: Vec<(String, String)>) {
        self.push(check, location, Status::Indeterminate, witnesses);
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.entries.extend(other.entries);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn has_check(&self, check: &str) -> bool {
        self.entries.iter().any(|e| e.check == check)
    }

    /// Fail entries among checks whose id starts with `prefix`.
    pub fn failures_for(&self, prefix: &str) -> Vec<&Entry> {
        self.entries
            .iter()
            .filter(|e| e.status == Status::Fail && e.check.starts_with(prefix))
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let tag = match e.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Indeterminate => "INDET",
            };
            write!(f, "{:5} {} @ {}", tag, e.check, e.location)?;
            if !e.witnesses.is_empty() {
                let parts: Vec<String> =
                    e.witnesses.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(f, "  [{}]", parts.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
