//! Independent re-implementations checked against the library.

mod common;

use microbe_screen::augment::Raster;
use microbe_screen::classify::{preprocess, ModelManifest};
use microbe_screen::metrics::{self, bootstrap, ConfusionCounts, Metric, ScoredSample};
use microbe_screen::seed::stream_rng;
use microbe_screen::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_scores(rng: &mut ChaCha8Rng, n: usize) -> Vec<ScoredSample> {
    (0..n)
        .map(|_| {
            let truth = if rng.random_bool(0.5) { Label::Unsafe } else { Label::Safe };
            // Coarse grid so ties occur.
            let p = (rng.random_range(0..=40) as f64) / 40.0;
            ScoredSample::new(truth, p).unwrap()
        })
        .collect()
}

/// Tally written from the definitions, one sample at a time.
fn oracle_counts(samples: &[ScoredSample], t: f64) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for s in samples {
        let positive = s.prob_unsafe >= t;
        match (s.truth == Label::Unsafe, positive) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    (tp, fp, fn_, tn)
}

#[test]
fn confusion_matches_hand_tally() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples = random_scores(&mut rng, 200);
    let c = metrics::confusion(&samples, 0.37).unwrap();
    assert_eq!((c.tp, c.fp, c.fn_, c.tn), oracle_counts(&samples, 0.37));
}

#[test]
fn f1_matches_direct_formula_on_random_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let c = ConfusionCounts {
            tp: rng.random_range(1..1000),
            fp: rng.random_range(0..1000),
            fn_: rng.random_range(0..1000),
            tn: rng.random_range(0..1000),
        };
        let p = c.tp as f64 / (c.tp + c.fp) as f64;
        let r = c.tp as f64 / (c.tp + c.fn_) as f64;
        assert!((c.f1().unwrap() - 2.0 * p * r / (p + r)).abs() < 1e-12);
    }
}

/// Resampler written independently, using the same per-replicate stream protocol.
fn oracle_bootstrap(samples: &[ScoredSample], t: f64, metric: Metric, b: usize, alpha: f64, seed: u64) -> (f64, f64, f64) {
    let n = samples.len();
    let mut values = Vec::with_capacity(b);
    for r in 0..b {
        let mut rng = stream_rng(seed, r as u64);
        loop {
            let draw: Vec<ScoredSample> = (0..n).map(|_| samples[rng.random_range(0..n)]).collect();
            let (tp, fp, fn_, tn) = oracle_counts(&draw, t);
            let (tp, fp, fn_, tn) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
            let v = match metric {
                Metric::Accuracy => Some((tp + tn) / (tp + fp + fn_ + tn)),
                Metric::Precision => (tp + fp > 0.0).then(|| tp / (tp + fp)),
                Metric::Recall => (tp + fn_ > 0.0).then(|| tp / (tp + fn_)),
                Metric::F1 => (tp > 0.0).then(|| 2.0 * tp / (2.0 * tp + fp + fn_)),
            };
            if let Some(v) = v {
                values.push(v);
                break;
            }
        }
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1) as f64).sqrt();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = (alpha / 2.0 * b as f64).round() as usize;
    (values[k], values[b - 1 - k], sd)
}

#[test]
fn bootstrap_matches_oracle_resampler() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // About 90% correct at t = 0.5.
    let samples: Vec<ScoredSample> = (0..500)
        .map(|_| {
            let truth = if rng.random_bool(0.5) { Label::Unsafe } else { Label::Safe };
            let correct = rng.random_bool(0.9);
            let p = if truth.is_unsafe() == correct { 0.75 } else { 0.25 };
            ScoredSample::new(truth, p).unwrap()
        })
        .collect();
    for metric in Metric::ALL {
        let r = bootstrap(&samples, 0.5, metric, 1000, 0.05, 42).unwrap();
        let (lo, hi, sd) = oracle_bootstrap(&samples, 0.5, metric, 1000, 0.05, 42);
        assert!((r.ci_low - lo).abs() < 1e-12, "{metric} low");
        assert!((r.ci_high - hi).abs() < 1e-12, "{metric} high");
        assert!((r.sd - sd).abs() < 1e-12, "{metric} sd");
    }
    let acc = bootstrap(&samples, 0.5, Metric::Accuracy, 1000, 0.05, 42).unwrap();
    let binomial = (acc.point * (1.0 - acc.point) / 500.0).sqrt();
    assert!((acc.sd / binomial - 1.0).abs() < 0.25, "sd {} vs {}", acc.sd, binomial);
}

/// Bilinear resampling written as a tent-kernel sum over every source pixel.
fn tent_resize(src: &[f64], n: usize, m: usize) -> Vec<f64> {
    let scale = n as f64 / m as f64;
    let coord = |i: usize| (((i as f64) + 0.5) * scale - 0.5).max(0.0).min((n - 1) as f64);
    let weight = |pos: f64, j: usize| (1.0 - (pos - j as f64).abs()).max(0.0);
    let mut out = vec![0.0; m * m];
    for oy in 0..m {
        let py = coord(oy);
        for ox in 0..m {
            let px = coord(ox);
            let mut acc = 0.0;
            for sy in 0..n {
                let wy = weight(py, sy);
                if wy == 0.0 {
                    continue;
                }
                for sx in 0..n {
                    acc += wy * weight(px, sx) * src[sy * n + sx];
                }
            }
            out[oy * m + ox] = acc;
        }
    }
    out
}

#[test]
fn checkerboard_downsample_matches_tent_oracle() {
    // 448×448 checkerboard with 3-pixel cells so the 2:1 resize mixes cells.
    let n = 448;
    let gray: Vec<u8> = (0..n * n).map(|i| if ((i % n) / 3 + (i / n) / 3) % 2 == 0 { 230 } else { 20 }).collect();
    let raster = Raster::new(n as u32, n as u32, 1, gray.clone()).unwrap();
    let manifest = ModelManifest::reference("oracle");
    let t = preprocess(&raster, &manifest).unwrap();
    let src: Vec<f64> = gray.iter().map(|&v| v as f64 / 255.0).collect();
    let expected = tent_resize(&src, n, 224);
    for c in 0..3 {
        for y in 0..224 {
            for x in 0..224 {
                let got = t.get(c, y, x) as f64;
                assert!((got - expected[y * 224 + x]).abs() < 1e-4, "({c},{y},{x}) {got} vs {}", expected[y * 224 + x]);
            }
        }
    }
}

#[test]
fn non_integer_scale_matches_tent_oracle() {
    let n = 300;
    let raster = common::noise(n as u32, n as u32 + 40, 1, 9);
    let t = preprocess(&raster, &ModelManifest::reference("oracle")).unwrap();
    // Center crop rows 20..320.
    let src: Vec<f64> = raster.pixels()[20 * n..(20 + n) * n].iter().map(|&v| v as f64 / 255.0).collect();
    let expected = tent_resize(&src, n, 224);
    for (i, e) in expected.iter().enumerate() {
        assert!((t.data()[i] as f64 - e).abs() < 1e-4);
    }
}
