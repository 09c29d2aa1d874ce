//! Evaluation of probability scores against ground truth.
//!
//! The positive class is `unsafe`. A sample is predicted unsafe when its
//! probability is at least the threshold. All metrics are fractions in
//! `[0, 1]`; percentages only appear in [`report`].

mod bootstrap;
mod curve;
pub mod report;
pub mod score_file;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap, tail_rank, BootstrapReport, MAX_REDRAW_FACTOR};
pub use curve::{calibrate_threshold, candidate_thresholds, pr_curve, CalibrationResult, PrPoint, SENTINEL_THRESHOLD};

use crate::Label;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no samples")]
    EmptyInput,
    #[error("{0} is undefined (zero denominator)")]
    UndefinedMetric(Metric),
    #[error("precision-recall analysis needs both classes present")]
    SingleClassInput,
    #[error("no threshold reaches precision {target}")]
    NoFeasibleThreshold { target: f64 },
    #[error("too many undefined bootstrap replicates ({redraws} redraws, cap {cap})")]
    DegenerateResampling { redraws: usize, cap: usize },
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::EmptyInput => "empty_input",
            MetricsError::UndefinedMetric(_) => "undefined_metric",
            MetricsError::SingleClassInput => "single_class_input",
            MetricsError::NoFeasibleThreshold { .. } => "no_feasible_threshold",
            MetricsError::DegenerateResampling { .. } => "degenerate_resampling",
            MetricsError::InvalidProbability(_) => "invalid_probability",
            MetricsError::InvalidArgument(_) => "invalid_argument",
        }
    }
}

/// Ground truth paired with the model's probability that the sample is unsafe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub truth: Label,
    pub prob_unsafe: f64,
}

impl ScoredSample {
    pub fn new(truth: Label, prob_unsafe: f64) -> Result<Self, MetricsError> {
        if !(0.0..=1.0).contains(&prob_unsafe) {
            return Err(MetricsError::InvalidProbability(prob_unsafe));
        }
        Ok(ScoredSample { truth, prob_unsafe })
    }

    pub fn predicted(&self, threshold: f64) -> Label {
        Label::decide(self.prob_unsafe, threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Precision,
    Recall,
    Accuracy,
    F1,
}

impl Metric {
    /// Column order used by the confidence-interval table.
    pub const ALL: [Metric; 4] = [Metric::Precision, Metric::Recall, Metric::Accuracy, Metric::F1];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Accuracy => "accuracy",
            Metric::F1 => "f1",
        }
    }

    pub fn evaluate(self, counts: &ConfusionCounts) -> Result<f64, MetricsError> {
        match self {
            Metric::Precision => counts.precision(),
            Metric::Recall => counts.recall(),
            Metric::Accuracy => counts.accuracy(),
            Metric::F1 => counts.f1(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "precision" => Ok(Metric::Precision),
            "recall" => Ok(Metric::Recall),
            "accuracy" => Ok(Metric::Accuracy),
            "f1" | "f-1" => Ok(Metric::F1),
            other => Err(MetricsError::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Unsafe, Label::Unsafe) => self.tp += 1,
            (Label::Safe, Label::Unsafe) => self.fp += 1,
            (Label::Unsafe, Label::Safe) => self.fn_ += 1,
            (Label::Safe, Label::Safe) => self.tn += 1,
        }
    }

    pub fn accuracy(&self) -> Result<f64, MetricsError> {
        ratio(self.tp + self.tn, self.total(), Metric::Accuracy)
    }

    pub fn precision(&self) -> Result<f64, MetricsError> {
        ratio(self.tp, self.tp + self.fp, Metric::Precision)
    }

    pub fn recall(&self) -> Result<f64, MetricsError> {
        ratio(self.tp, self.tp + self.fn_, Metric::Recall)
    }

    /// Harmonic mean of precision and recall.
    pub fn f1(&self) -> Result<f64, MetricsError> {
        let p = self.precision()?;
        let r = self.recall()?;
        if p + r == 0.0 {
            return Err(MetricsError::UndefinedMetric(Metric::F1));
        }
        Ok(2.0 * p * r / (p + r))
    }

    pub fn summary(&self) -> Result<MetricSummary, MetricsError> {
        Ok(MetricSummary {
            accuracy: self.accuracy()?,
            precision: self.precision()?,
            recall: self.recall()?,
            f1: self.f1()?,
        })
    }
}

fn ratio(num: u64, den: u64, metric: Metric) -> Result<f64, MetricsError> {
    if den == 0 {
        Err(MetricsError::UndefinedMetric(metric))
    } else {
        Ok(num as f64 / den as f64)
    }
}

/// The four headline metrics at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricSummary {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::Accuracy => self.accuracy,
            Metric::F1 => self.f1,
        }
    }
}

/// Tallies predictions at `threshold` (inclusive) against truth.
pub fn confusion(samples: &[ScoredSample], threshold: f64) -> Result<ConfusionCounts, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut counts = ConfusionCounts::default();
    for s in samples {
        counts.record(s.truth, s.predicted(threshold));
    }
    Ok(counts)
}

/// Confusion counts and metrics at a fixed threshold.
pub fn evaluate(samples: &[ScoredSample], threshold: f64) -> Result<(ConfusionCounts, MetricSummary), MetricsError> {
    let counts = confusion(samples, threshold)?;
    Ok((counts, counts.summary()?))
}
