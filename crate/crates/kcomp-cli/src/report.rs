//! JSON report emitted by every subcommand.
//!
//! Key order is fixed by the struct layout; optional keys are skipped when
//! absent. Floats are serialized in shortest round-trip form, so identical
//! problems produce byte-identical reports (apart from `timing_ms`).

use kcomp::classify::{CertReport, Witness};
use serde::Serialize;

/// Witness for a refuted or inconclusive verdict, mirrored for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct ReportWitness {
    /// Sample label: time for time grids, flat index for state grids.
    pub label: f64,
    /// State-space point of the sample, when the grid was spatial.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    /// 1-based matrix entry location, when a single entry is to blame.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<(usize, usize)>,
    /// Offending value (entry, measure, or fraction, per `detail`).
    pub value: f64,
    /// Human-readable description of what the value is.
    pub detail: String,
}

impl From<&Witness> for ReportWitness {
    fn from(w: &Witness) -> Self {
        ReportWitness {
            label: w.label,
            point: w.point.clone(),
            location: w.location,
            value: w.value,
            detail: w.detail.clone(),
        }
    }
}

/// Sampling-grid metadata echoed into the report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportGrid {
    /// What was sampled, plus any verdict rationale.
    pub description: String,
    /// Number of samples inspected.
    pub samples: usize,
}

/// The report printed (or written to `--out`) by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Task that produced the report.
    pub task: String,
    /// SHA-256 digest of the canonical problem description.
    pub input_digest: String,
    /// Certification verdict, for certify tasks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    /// Certified margin (or violation magnitude), for certify tasks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// Witness of a refutation, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ReportWitness>,
    /// Matrix result (scalars are returned as 1x1 matrices).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result_matrix: Option<Vec<Vec<f64>>>,
    /// Sampling grid metadata, for certify tasks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<ReportGrid>,
    /// Wall-clock task duration in milliseconds.
    pub timing_ms: u64,
}

impl Report {
    /// Report skeleton with only the always-present fields filled in.
    pub fn new(task: &str, input_digest: String) -> Self {
        Report {
            task: task.to_string(),
            input_digest,
            verdict: None,
            margin: None,
            witness: None,
            result_matrix: None,
            grid: None,
            timing_ms: 0,
        }
    }

    /// Copies verdict, margin, witness, and grid out of a certification run.
    pub fn with_certification(mut self, cert: &CertReport) -> Self {
        self.verdict = Some(cert.verdict.to_string());
        self.margin = Some(cert.margin);
        self.witness = cert.witness.as_ref().map(ReportWitness::from);
        let description = match &cert.rationale {
            Some(rationale) => format!("{}; {rationale}", cert.grid.description),
            None => cert.grid.description.clone(),
        };
        self.grid = Some(ReportGrid { description, samples: cert.grid.samples });
        self
    }

    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports always serialize");
        text.push('\n');
        text
    }
}
