use serde::{Deserialize, Serialize};

use super::{ConfusionCounts, MetricsError, ScoredSample};
use crate::Label;

/// Threshold above every probability; predicts nothing unsafe.
pub const SENTINEL_THRESHOLD: f64 = 1.0 + f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub target_precision: f64,
    pub threshold: f64,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// Sorted unique probabilities plus [`SENTINEL_THRESHOLD`].
pub fn candidate_thresholds(samples: &[ScoredSample]) -> Vec<f64> {
    let mut t: Vec<f64> = samples.iter().map(|s| s.prob_unsafe).collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t.push(SENTINEL_THRESHOLD);
    t
}

/// Confusion counts at every candidate threshold, ascending, in one sorted pass.
fn sweep(samples: &[ScoredSample]) -> Vec<(f64, ConfusionCounts)> {
    let positives = samples.iter().filter(|s| s.truth.is_unsafe()).count() as u64;
    let negatives = samples.len() as u64 - positives;
    let mut sorted: Vec<&ScoredSample> = samples.iter().collect();
    sorted.sort_by(|a, b| b.prob_unsafe.total_cmp(&a.prob_unsafe));

    let mut out = Vec::with_capacity(samples.len() + 1);
    out.push((SENTINEL_THRESHOLD, ConfusionCounts { tp: 0, fp: 0, fn_: positives, tn: negatives }));
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].prob_unsafe;
        while i < sorted.len() && sorted[i].prob_unsafe == threshold {
            match sorted[i].truth {
                Label::Unsafe => tp += 1,
                Label::Safe => fp += 1,
            }
            i += 1;
        }
        out.push((threshold, ConfusionCounts { tp, fp, fn_: positives - tp, tn: negatives - fp }));
    }
    out.reverse();
    out
}

fn require_both_classes(samples: &[ScoredSample]) -> Result<(), MetricsError> {
    let has = |l: Label| samples.iter().any(|s| s.truth == l);
    if has(Label::Safe) && has(Label::Unsafe) {
        Ok(())
    } else {
        Err(MetricsError::SingleClassInput)
    }
}

/// Precision and recall at every candidate threshold where precision is
/// defined, in ascending threshold order. Recall never increases along the curve.
pub fn pr_curve(samples: &[ScoredSample]) -> Result<Vec<PrPoint>, MetricsError> {
    require_both_classes(samples)?;
    Ok(sweep(samples)
        .into_iter()
        .filter_map(|(threshold, c)| {
            let precision = c.precision().ok()?;
            let recall = c.recall().ok()?;
            Some(PrPoint { threshold, precision, recall })
        })
        .collect())
}

/// Among candidate thresholds whose precision reaches `target_precision`, picks
/// the one with the highest recall (lowest threshold on ties) and reports all
/// four metrics there.
pub fn calibrate_threshold(samples: &[ScoredSample], target_precision: f64) -> Result<CalibrationResult, MetricsError> {
    if !(target_precision > 0.0 && target_precision <= 1.0) {
        return Err(MetricsError::InvalidArgument(format!("target precision {target_precision} not in (0, 1]")));
    }
    require_both_classes(samples)?;
    let mut best: Option<(f64, ConfusionCounts, f64)> = None;
    for (threshold, counts) in sweep(samples) {
        let Ok(precision) = counts.precision() else { continue };
        if precision < target_precision {
            continue;
        }
        let recall = counts.recall()?;
        if best.map_or(true, |(_, _, r)| recall > r) {
            best = Some((threshold, counts, recall));
        }
    }
    let (threshold, counts, recall) = best.ok_or(MetricsError::NoFeasibleThreshold { target: target_precision })?;
    Ok(CalibrationResult {
        target_precision,
        threshold,
        counts,
        precision: counts.precision()?,
        recall,
        accuracy: counts.accuracy()?,
        f1: counts.f1()?,
    })
}
