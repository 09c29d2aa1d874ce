//! Text and JSON renderings of evaluation results.
//!
//! Percentages carry two decimals (`94.48%`), thresholds four (`0.8443`), and
//! confidence cells read `[low, high] sd` with four decimals each.

use serde::{Deserialize, Serialize};

use super::{BootstrapReport, CalibrationResult, ConfusionCounts, Metric, MetricSummary};

pub fn percent(fraction: f64) -> String {
    format!("{:.2}%", fraction * 100.0)
}

pub fn threshold_cell(threshold: f64) -> String {
    format!("{threshold:.4}")
}

pub fn ci_cell(low: f64, high: f64, sd: f64) -> String {
    format!("[{low:.4}, {high:.4}] {sd:.4}")
}

/// `Accuracy 92.23%` style lines, one per metric.
pub fn metric_lines(summary: &MetricSummary) -> String {
    format!(
        "Accuracy {}\nPrecision {}\nRecall {}\nF1 {}\n",
        percent(summary.accuracy),
        percent(summary.precision),
        percent(summary.recall),
        percent(summary.f1)
    )
}

fn table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = format!("| {} |\n", header.join(" | "));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for row in rows {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}

/// One row of the field-test table: metrics at the default threshold, then at
/// the calibrated one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTableRow {
    pub model: String,
    pub default: MetricSummary,
    pub calibrated_threshold: f64,
    pub calibrated: MetricSummary,
}

impl ThresholdTableRow {
    pub fn new(model: impl Into<String>, default: MetricSummary, calibration: &CalibrationResult) -> Self {
        ThresholdTableRow {
            model: model.into(),
            default,
            calibrated_threshold: calibration.threshold,
            calibrated: MetricSummary {
                accuracy: calibration.accuracy,
                precision: calibration.precision,
                recall: calibration.recall,
                f1: calibration.f1,
            },
        }
    }
}

pub const THRESHOLD_TABLE_HEADER: [&str; 10] = [
    "Model",
    "Acc.",
    "Prec.",
    "Recall",
    "F-1",
    "Opt. Thresh.",
    "Prec. (Opt.)",
    "Recall (Opt.)",
    "Acc. (Opt.)",
    "F-1 (Opt.)",
];

pub fn threshold_table(rows: &[ThresholdTableRow]) -> String {
    table(
        &THRESHOLD_TABLE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.model.clone(),
                percent(r.default.accuracy),
                percent(r.default.precision),
                percent(r.default.recall),
                percent(r.default.f1),
                threshold_cell(r.calibrated_threshold),
                percent(r.calibrated.precision),
                percent(r.calibrated.recall),
                percent(r.calibrated.accuracy),
                percent(r.calibrated.f1),
            ]
        }),
    )
}

/// One row of the confidence-interval table; cells in [`Metric::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalTableRow {
    pub model: String,
    pub cells: Vec<(Metric, f64, f64, f64)>,
}

impl IntervalTableRow {
    pub fn from_reports(model: impl Into<String>, reports: &[BootstrapReport]) -> Self {
        let mut cells: Vec<(Metric, f64, f64, f64)> =
            reports.iter().map(|r| (r.metric_name, r.ci_low, r.ci_high, r.sd)).collect();
        cells.sort_by_key(|c| Metric::ALL.iter().position(|m| *m == c.0));
        IntervalTableRow { model: model.into(), cells }
    }
}

pub const INTERVAL_TABLE_HEADER: [&str; 5] = ["Model", "Precision", "Recall", "Accuracy", "F-1 Score"];

pub fn interval_table(rows: &[IntervalTableRow]) -> String {
    table(
        &INTERVAL_TABLE_HEADER,
        rows.iter().map(|r| {
            std::iter::once(r.model.clone())
                .chain(r.cells.iter().map(|&(_, lo, hi, sd)| ci_cell(lo, hi, sd)))
                .collect()
        }),
    )
}

/// Structured report written next to any evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub threshold: f64,
    pub counts: ConfusionCounts,
    pub metrics: MetricSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<BootstrapReport>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub metric_table: String,
}
