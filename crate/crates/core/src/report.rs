//! Machine-readable verification report.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Nothing was evaluated (no samples). Does not fail the run.
    Flagged,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    pub worst_point: Option<Vec<f64>>,
    pub samples_used: usize,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl CheckRecord {
    /// Record from per-sample residuals; status is `pass` iff the maximum is
    /// below `tolerance`.
    pub fn from_values(name: &str, values: &[f64], points: &[Vec<f64>], tolerance: f64) -> CheckRecord {
        if values.is_empty() {
            return CheckRecord::flagged(name, tolerance, "no samples");
        }
        let (mut worst, mut max) = (0, f64::NEG_INFINITY);
        for (i, v) in values.iter().enumerate() {
            // NaN counts as the worst possible value
            let a = if v.is_nan() { f64::INFINITY } else { v.abs() };
            if a > max {
                max = a;
                worst = i;
            }
        }
        let mean = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
        CheckRecord {
            name: name.to_string(),
            status: if max < tolerance { Status::Pass } else { Status::Fail },
            max_abs_residual: max,
            mean_abs_residual: mean,
            worst_point: points.get(worst).cloned(),
            samples_used: values.len(),
            tolerance,
            note: None,
            details: None,
        }
    }

    /// Record for a single aggregate residual.
    pub fn scalar(name: &str, residual: f64, samples_used: usize, tolerance: f64) -> CheckRecord {
        let r = if residual.is_nan() { f64::INFINITY } else { residual.abs() };
        CheckRecord {
            name: name.to_string(),
            status: if r < tolerance { Status::Pass } else { Status::Fail },
            max_abs_residual: r,
            mean_abs_residual: r,
            worst_point: None,
            samples_used,
            tolerance,
            note: None,
            details: None,
        }
    }

    pub fn flagged(name: &str, tolerance: f64, note: &str) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            status: Status::Flagged,
            max_abs_residual: 0.0,
            mean_abs_residual: 0.0,
            worst_point: None,
            samples_used: 0,
            tolerance,
            note: Some(note.to_string()),
            details: None,
        }
    }

    /// A check that could not be evaluated.
    pub fn errored(name: &str, tolerance: f64, err: &crate::Error) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            status: Status::Fail,
            max_abs_residual: f64::INFINITY,
            mean_abs_residual: f64::INFINITY,
            worst_point: None,
            samples_used: 0,
            tolerance,
            note: Some(format!("evaluation error: {err}")),
            details: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckRecord {
        self.note = Some(note.into());
        self
    }

    pub fn with_details(mut self, details: impl Serialize) -> CheckRecord {
        self.details = serde_json::to_value(details).ok();
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplingSummary {
    pub requested: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub reasons: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolitonSummary {
    pub rho: f64,
    pub lambda: f64,
    pub lambda_solved: bool,
    pub classification: Vec<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub parallel_feature: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub manifest_digest: String,
    pub kind: &'static str,
    pub seed: u64,
    pub sampling: SamplingSummary,
    pub soliton: Option<SolitonSummary>,
    pub environment: Environment,
    pub checks: Vec<CheckRecord>,
    /// sha256 of the report with this field and `wall_time_seconds` removed.
    pub report_digest: String,
    pub wall_time_seconds: f64,
}

impl VerificationReport {
    pub fn finalize(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self.report_digest = self.compute_digest();
    }

    pub fn compute_digest(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("report_digest");
            obj.remove("wall_time_seconds");
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }
}
