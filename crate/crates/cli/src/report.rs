//! The JSON envelope shared by every subcommand.

use qaskit::format::AccessStructureDoc;
use qaskit::maximalize::ReductionStep;
use qaskit::{PlayerSet, Universe};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub action: String,
    pub set: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replaced: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deleted: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_after: Option<usize>,
}

impl Step {
    pub fn add(u: &Universe, set: PlayerSet) -> Self {
        Step {
            action: "authorize".into(),
            set: u.set_labels(set),
            replaced: Vec::new(),
            deleted: Vec::new(),
            r_after: None,
        }
    }

    pub fn pivot(u: &Universe, s: &ReductionStep) -> Self {
        Step {
            action: "pivot".into(),
            set: u.set_labels(s.pivot),
            replaced: s.replaced.iter().map(|&a| u.set_labels(a)).collect(),
            deleted: s.deleted.iter().map(|&a| u.set_labels(a)).collect(),
            r_after: Some(s.r_after),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub operation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<AccessStructureDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub parameters: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<Step>,
    pub result: Value,
    pub passed: bool,
}

/// A finished subcommand: the JSON report plus its plain-text rendering.
pub struct Outcome {
    pub report: Report,
    pub text: String,
}
