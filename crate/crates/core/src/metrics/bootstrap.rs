use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{confusion, ConfusionCounts, Metric, MetricsError, ScoredSample};
use crate::seed::stream_rng;

/// Undefined replicates are redrawn, at most `MAX_REDRAW_FACTOR · B` times in total.
pub const MAX_REDRAW_FACTOR: usize = 10;

/// Percentile bootstrap interval for one metric at a fixed threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub metric_name: Metric,
    pub threshold: f64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub sd: f64,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Replicates dropped from each tail; `floor(alpha/2 · B)`.
    pub trimmed_per_tail: usize,
    pub redraws: usize,
}

/// Zero-based rank of the lower bound: `floor(alpha/2 · B)`.
///
/// A tiny tolerance absorbs representation error, so `alpha = 0.05, B = 1000`
/// gives exactly 25.
pub fn tail_rank(replicates: usize, alpha: f64) -> usize {
    ((alpha / 2.0) * replicates as f64 + 1e-9).floor() as usize
}

// Per-sample outcome codes: index into ConfusionCounts fields.
const TP: u8 = 0;
const FP: u8 = 1;
const FN: u8 = 2;
const TN: u8 = 3;

fn outcomes(samples: &[ScoredSample], threshold: f64) -> Vec<u8> {
    samples
        .iter()
        .map(|s| match (s.truth.is_unsafe(), s.predicted(threshold).is_unsafe()) {
            (true, true) => TP,
            (false, true) => FP,
            (true, false) => FN,
            (false, false) => TN,
        })
        .collect()
}

fn resample_counts<R: Rng>(rng: &mut R, outcomes: &[u8]) -> ConfusionCounts {
    let mut tally = [0u64; 4];
    let n = outcomes.len();
    for _ in 0..n {
        tally[outcomes[rng.random_range(0..n)] as usize] += 1;
    }
    ConfusionCounts { tp: tally[TP as usize], fp: tally[FP as usize], fn_: tally[FN as usize], tn: tally[TN as usize] }
}

/// Percentile bootstrap of `metric` at `threshold`.
///
/// Replicate `r` resamples `|samples|` items with replacement from its own
/// stream `(seed, r)`, so results do not depend on thread scheduling. The sorted
/// replicate values give `ci_low` at rank `floor(alpha/2 · B)` and `ci_high` at
/// rank `B − 1 − floor(alpha/2 · B)`; `sd` is the sample standard deviation.
pub fn bootstrap(
    samples: &[ScoredSample],
    threshold: f64,
    metric: Metric,
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<BootstrapReport, MetricsError> {
    bootstrap_with_cap(samples, threshold, metric, replicates, alpha, seed, MAX_REDRAW_FACTOR * replicates)
}

fn bootstrap_with_cap(
    samples: &[ScoredSample],
    threshold: f64,
    metric: Metric,
    replicates: usize,
    alpha: f64,
    seed: u64,
    cap: usize,
) -> Result<BootstrapReport, MetricsError> {
    if replicates < 2 {
        return Err(MetricsError::InvalidArgument(format!("B = {replicates}, need at least 2")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MetricsError::InvalidArgument(format!("alpha = {alpha}, need 0 < alpha < 1")));
    }
    let point = metric.evaluate(&confusion(samples, threshold)?)?;
    let outcomes = outcomes(samples, threshold);

    let draws: Vec<Result<(f64, usize), MetricsError>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let mut redraws = 0usize;
            loop {
                match metric.evaluate(&resample_counts(&mut rng, &outcomes)) {
                    Ok(v) => return Ok((v, redraws)),
                    Err(_) if redraws < cap => redraws += 1,
                    Err(_) => return Err(MetricsError::DegenerateResampling { redraws: redraws + 1, cap }),
                }
            }
        })
        .collect();

    let mut values = Vec::with_capacity(replicates);
    let mut redraws = 0usize;
    for d in draws {
        let (v, r) = d?;
        values.push(v);
        redraws += r;
    }
    if redraws > cap {
        return Err(MetricsError::DegenerateResampling { redraws, cap });
    }

    let mean = values.iter().sum::<f64>() / replicates as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (replicates - 1) as f64;
    values.sort_by(f64::total_cmp);
    let lo = tail_rank(replicates, alpha);
    let hi = replicates - 1 - lo;

    Ok(BootstrapReport {
        metric_name: metric,
        threshold,
        point,
        ci_low: values[lo],
        ci_high: values[hi],
        sd: var.sqrt(),
        replicates,
        alpha,
        seed,
        trimmed_per_tail: lo,
        redraws,
    })
}
