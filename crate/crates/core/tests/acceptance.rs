//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach the
//! test log. Exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use microbe_screen::augment::{apply_permutation, make_square, sample_permutation, AugmentConfig, TILE_COUNT};
use microbe_screen::classify::{load_model_file, InputTensor};
use microbe_screen::dataset::{self, ImageSample, LabelingRule, Split, SplitAugment, SplitRatios};
use microbe_screen::metrics::{
    self, bootstrap, calibrate_threshold, pr_curve, report, score_file, tail_rank, CalibrationResult, Metric,
    MetricsError, ScoredSample, SENTINEL_THRESHOLD,
};
use microbe_screen::service::{self, PredictResponse, ServiceConfig};
use microbe_screen::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("augmentation group properties", augmentation_group),
        ("field-set count", field_set_count),
        ("split fidelity", split_fidelity),
        ("metrics oracle equivalence", metrics_oracle),
        ("calibration optimality", calibration_optimality),
        ("bootstrap", bootstrap_criteria),
        ("published numbers and report formats", published_numbers),
        ("service round-trip", service_round_trip),
        ("reference classifier analytic checks", reference_analytic),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1} s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

/// Parity from the inversion count, independent of cycle structure.
fn inversion_parity_even(mapping: &[u8]) -> bool {
    let mut inversions = 0;
    for i in 0..mapping.len() {
        for j in i + 1..mapping.len() {
            inversions += usize::from(mapping[i] > mapping[j]);
        }
    }
    inversions % 2 == 0
}

fn augmentation_group() -> Outcome {
    let start = Instant::now();
    let config = AugmentConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for i in 0..10_000 {
        let p = sample_permutation(&mut rng, &config);
        let mut seen = [false; TILE_COUNT];
        for &m in p.mapping() {
            ensure!(!std::mem::replace(&mut seen[m as usize], true), "permutation {i} is not a bijection");
        }
        ensure!((4..=12).contains(&p.transpositions()), "permutation {i} used {} swaps", p.transpositions());
        let even = p.transpositions() % 2 == 0;
        ensure!(inversion_parity_even(p.mapping()) == even, "permutation {i} parity disagrees with k");
        ensure!(p.is_even() == even, "permutation {i} cycle parity disagrees with k");
    }
    for i in 0..50u64 {
        let w = rng.random_range(16..200);
        let h = rng.random_range(16..200);
        let channels = [1u8, 3, 4][i as usize % 3];
        let square = make_square(&common::noise(w, h, channels, 1000 + i)).map_err(|e| e.to_string())?;
        let out = apply_permutation(&square, &sample_permutation(&mut rng, &config));
        let multiset = |px: &[u8]| {
            let mut v: Vec<&[u8]> = px.chunks(channels as usize).collect();
            v.sort_unstable();
            v.into_iter().map(<[u8]>::to_vec).collect::<Vec<_>>()
        };
        ensure!(multiset(out.raster().pixels()) == multiset(square.raster().pixels()), "image {i} pixel multiset changed");
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s, limit 60 s");
    Ok("10000/10000 bijections, 10000/10000 parity-consistent, 50/50 images conserve pixels".into())
}

fn field_set_count() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("field");
    for i in 0..160u32 {
        let label = if i % 2 == 0 { Label::Safe } else { Label::Unsafe };
        let px = (0..224u32 * 224).flat_map(|j| [((j % 224 + i) % 256) as u8, ((j / 224) % 256) as u8, (i * 3 % 256) as u8]);
        let raster = microbe_screen::augment::Raster::new(224, 224, 3, px.collect()).map_err(|e| e.to_string())?;
        common::save_png(&raster, &root.join(label.as_str()).join(format!("field_{i:03}.png")));
    }
    let out = dir.path().join("expanded");
    let start = Instant::now();
    let samples = dataset::list_labeled_files(&root, &LabelingRule::ClassFolders).map_err(|e| e.to_string())?;
    let field = dataset::expand_field_set(&samples, 625, 2024, Some(&out)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();

    ensure!(field.entries.len() == 160, "{} originals", field.entries.len());
    ensure!(field.total_augmented() == 100_000, "{} outputs recorded", field.total_augmented());
    for e in &field.entries {
        let distinct: HashSet<_> = e.augmented.iter().map(|r| r.mapping).collect();
        ensure!(distinct.len() == 625, "{} has {} distinct mappings", e.sample.path.display(), distinct.len());
    }
    let on_disk = walkdir::WalkDir::new(&out)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.path().extension().is_some_and(|x| x == "png"))
        .count();
    ensure!(on_disk == 100_000, "{on_disk} PNGs written");
    ensure!(secs < 600.0, "took {secs:.1} s, limit 600 s");
    Ok(format!("160 × 625 = {on_disk} PNGs at 224×224, 625 distinct mappings per image, {secs:.1} s"))
}

fn split_fidelity() -> Outcome {
    let samples: Vec<ImageSample> = (0..297)
        .map(|i| ImageSample {
            path: PathBuf::from(format!("orig/{i:03}.png")),
            label: if i < 151 { Label::Safe } else { Label::Unsafe },
            source_id: format!("source{}", i % 14),
            stained: false,
        })
        .collect();
    let manifest = dataset::split(&samples, SplitRatios::new(0.7, 0.2, 0.1).map_err(|e| e.to_string())?, 7)
        .map_err(|e| e.to_string())?;
    let counts = manifest.split_counts();
    let got = (counts[&Split::Train], counts[&Split::Validation], counts[&Split::Test]);
    ensure!(got == (205, 61, 31), "split sizes {got:?}");

    let plans: BTreeMap<Split, SplitAugment> = [
        (Split::Train, SplitAugment::total(19_530)),
        (Split::Validation, SplitAugment::total(6_905)),
        (Split::Test, SplitAugment::total(3_590)),
    ]
    .into_iter()
    .collect();
    let augmented = dataset::augment_splits(&manifest, &plans, None).map_err(|e| e.to_string())?;

    // Leakage scan: each output path names exactly one split, which must be its
    // original's; no original and no output appears under two splits.
    let mut originals: BTreeMap<&PathBuf, BTreeSet<Split>> = BTreeMap::new();
    let mut outputs: BTreeMap<&str, BTreeSet<Split>> = BTreeMap::new();
    let mut links = 0usize;
    for e in &augmented.entries {
        originals.entry(&e.sample.path).or_default().insert(e.split);
        for r in &e.augmented {
            let prefix = r.output_path.split('/').next().unwrap_or("");
            let implied = Split::ALL.iter().find(|s| s.as_str() == prefix).copied();
            if implied != Some(e.split) {
                links += 1;
            }
            outputs.entry(r.output_path.as_str()).or_default().insert(e.split);
        }
    }
    links += originals.values().filter(|s| s.len() > 1).count();
    links += outputs.values().filter(|s| s.len() > 1).count();
    ensure!(links == 0, "{links} cross-split provenance links");
    ensure!(augmented.violations().is_empty(), "manifest reports {:?}", augmented.violations());
    Ok(format!("297 → 205/61/31, {} augmented records, 0 cross-split links", outputs.len()))
}

fn random_dataset(rng: &mut ChaCha8Rng) -> Vec<ScoredSample> {
    let n = rng.random_range(1..=500);
    let prevalence = rng.random_range(0.05..0.95);
    let levels = rng.random_range(2..=200);
    // Unsafe scores are drawn from [signal, 1], safe ones from [0, 1 − signal].
    let signal = rng.random_range(0.0..0.6);
    (0..n)
        .map(|_| {
            let truth = if rng.random_bool(prevalence) { Label::Unsafe } else { Label::Safe };
            let u: f64 = rng.random_range(0.0..=1.0 - signal);
            let p = if truth.is_unsafe() { u + signal } else { u };
            ScoredSample::new(truth, ((p * levels as f64).round() / levels as f64).min(1.0)).unwrap()
        })
        .collect()
}

fn brute_counts(samples: &[ScoredSample], t: f64) -> [u64; 4] {
    let mut c = [0u64; 4];
    for s in samples {
        let idx = match (s.truth == Label::Unsafe, s.prob_unsafe >= t) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
        };
        c[idx] += 1;
    }
    c
}

fn div(a: u64, b: u64) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut points = 0usize;
    for d in 0..1000 {
        let samples = random_dataset(&mut rng);
        let t = rng.random_range(0.0..=1.0);
        let [tp, fp, fn_, tn] = brute_counts(&samples, t);
        let c = metrics::confusion(&samples, t).map_err(|e| e.to_string())?;
        ensure!([c.tp, c.fp, c.fn_, c.tn] == [tp, fp, fn_, tn], "dataset {d}: counts differ");
        ensure!(c.accuracy().ok() == div(tp + tn, tp + fp + fn_ + tn), "dataset {d}: accuracy");
        ensure!(c.precision().ok() == div(tp, tp + fp), "dataset {d}: precision");
        ensure!(c.recall().ok() == div(tp, tp + fn_), "dataset {d}: recall");
        let f1 = (tp > 0).then(|| 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64);
        match (c.f1().ok(), f1) {
            (Some(a), Some(b)) => ensure!((a - b).abs() <= 1e-12, "dataset {d}: f1 {a} vs {b}"),
            (a, b) => ensure!(a.is_none() && b.is_none(), "dataset {d}: f1 definedness {a:?} vs {b:?}"),
        }

        // Every distinct score plus a threshold above all scores.
        let mut thresholds: Vec<f64> = samples.iter().map(|s| s.prob_unsafe).collect();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        thresholds.push(SENTINEL_THRESHOLD);
        let expected: Vec<(f64, f64, f64)> = thresholds
            .iter()
            .filter_map(|&t| {
                let [tp, fp, fn_, _] = brute_counts(&samples, t);
                Some((t, div(tp, tp + fp)?, div(tp, tp + fn_)?))
            })
            .collect();
        let both = samples.iter().any(|s| s.truth == Label::Safe) && samples.iter().any(|s| s.truth == Label::Unsafe);
        match pr_curve(&samples) {
            Ok(curve) => {
                ensure!(both, "dataset {d}: curve for a single-class input");
                let got: Vec<(f64, f64, f64)> = curve.iter().map(|p| (p.threshold, p.precision, p.recall)).collect();
                ensure!(got == expected, "dataset {d}: curve differs from enumeration");
                points += got.len();
            }
            Err(MetricsError::SingleClassInput) => ensure!(!both, "dataset {d}: spurious single-class error"),
            Err(e) => return Err(format!("dataset {d}: {e}")),
        }
    }
    Ok(format!("1000 datasets: counts, accuracy, precision, recall bit-exact; F1 within 1e-12; {points} curve points match"))
}

fn calibration_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let (mut feasible, mut infeasible, mut single) = (0, 0, 0);
    for d in 0..200 {
        let samples = random_dataset(&mut rng);
        let mut thresholds: Vec<f64> = samples.iter().map(|s| s.prob_unsafe).collect();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        thresholds.push(SENTINEL_THRESHOLD);
        let best_recall = thresholds
            .iter()
            .filter_map(|&t| {
                let [tp, fp, fn_, _] = brute_counts(&samples, t);
                (div(tp, tp + fp)? >= 0.90).then(|| div(tp, tp + fn_)).flatten()
            })
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
        let both = samples.iter().any(|s| s.truth == Label::Safe) && samples.iter().any(|s| s.truth == Label::Unsafe);
        match calibrate_threshold(&samples, 0.90) {
            Ok(CalibrationResult { precision, recall, threshold, .. }) => {
                ensure!(precision >= 0.90, "dataset {d}: precision {precision}");
                ensure!(Some(recall) == best_recall, "dataset {d}: recall {recall} vs best {best_recall:?}");
                let [tp, fp, _, _] = brute_counts(&samples, threshold);
                ensure!(div(tp, tp + fp) == Some(precision), "dataset {d}: reported precision not at threshold");
                feasible += 1;
            }
            Err(MetricsError::NoFeasibleThreshold { .. }) => {
                ensure!(best_recall.is_none(), "dataset {d}: feasible threshold missed");
                infeasible += 1;
            }
            Err(MetricsError::SingleClassInput) => {
                ensure!(!both, "dataset {d}: spurious single-class error");
                single += 1;
            }
            Err(e) => return Err(format!("dataset {d}: {e}")),
        }
    }
    ensure!(infeasible > 0, "no infeasible case was exercised");
    Ok(format!("200 datasets at target 0.90: {feasible} optimal, {infeasible} infeasible, {single} single-class"))
}

/// Scored sample where the model is right with class-specific probability.
fn population_draw(rng: &mut ChaCha8Rng, prevalence: f64, sensitivity: f64, specificity: f64) -> ScoredSample {
    let truth = if rng.random_bool(prevalence) { Label::Unsafe } else { Label::Safe };
    let right = rng.random_bool(if truth.is_unsafe() { sensitivity } else { specificity });
    let p = if truth.is_unsafe() == right { 0.8 } else { 0.2 };
    ScoredSample::new(truth, p).unwrap()
}

fn bootstrap_criteria() -> Outcome {
    // Trimming.
    ensure!(tail_rank(1000, 0.05) == 25, "tail rank {}", tail_rank(1000, 0.05));
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let samples: Vec<ScoredSample> = (0..300).map(|_| population_draw(&mut rng, 0.45, 0.9, 0.85)).collect();
    let r = bootstrap(&samples, 0.5, Metric::Accuracy, 1000, 0.05, 1).map_err(|e| e.to_string())?;
    ensure!(r.trimmed_per_tail == 25, "trimmed {}", r.trimmed_per_tail);

    // All-correct input.
    let perfect: Vec<ScoredSample> = (0..100)
        .map(|i| if i % 2 == 0 { ScoredSample::new(Label::Unsafe, 0.9) } else { ScoredSample::new(Label::Safe, 0.1) })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for m in Metric::ALL {
        let r = bootstrap(&perfect, 0.5, m, 1000, 0.05, 3).map_err(|e| e.to_string())?;
        ensure!(r.ci_low == 1.0 && r.ci_high == 1.0 && r.sd == 0.0, "{m}: [{}, {}] sd {}", r.ci_low, r.ci_high, r.sd);
    }

    // Byte-exact determinism, across thread counts too.
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            Metric::ALL
                .iter()
                .map(|&m| serde_json::to_vec(&bootstrap(&samples, 0.5, m, 1000, 0.05, 99).unwrap()).unwrap())
                .collect::<Vec<_>>()
        })
    };
    let first = run(1);
    ensure!(first == run(1) && first == run(4), "repeated runs differ");

    // Coverage of the true population value.
    let mut covered = [0usize; 4];
    let populations = 200;
    for _ in 0..populations {
        let prevalence = rng.random_range(0.3..0.7);
        let se = rng.random_range(0.75..0.95);
        let sp = rng.random_range(0.75..0.95);
        let recall = se;
        let precision = prevalence * se / (prevalence * se + (1.0 - prevalence) * (1.0 - sp));
        let truth = [
            (Metric::Precision, precision),
            (Metric::Recall, recall),
            (Metric::Accuracy, prevalence * se + (1.0 - prevalence) * sp),
            (Metric::F1, 2.0 * precision * recall / (precision + recall)),
        ];
        let draw: Vec<ScoredSample> = (0..400).map(|_| population_draw(&mut rng, prevalence, se, sp)).collect();
        let seed = rng.random();
        for (i, (m, value)) in truth.into_iter().enumerate() {
            let r = bootstrap(&draw, 0.5, m, 1000, 0.05, seed).map_err(|e| e.to_string())?;
            covered[i] += usize::from(r.ci_low <= value && value <= r.ci_high);
        }
    }
    let rates: Vec<f64> = covered.iter().map(|&c| c as f64 / populations as f64).collect();
    let summary = Metric::ALL.iter().zip(&rates).map(|(m, r)| format!("{m} {:.1}%", r * 100.0)).collect::<Vec<_>>().join(", ");
    ensure!(rates.iter().all(|&r| r >= 0.90), "coverage below 90%: {summary}");
    Ok(format!("25 trimmed per tail, perfect input gives [1, 1] sd 0, byte-identical reruns, coverage {summary}"))
}

fn published_numbers() -> Outcome {
    // The published tables come from a trained checkpoint and field images that
    // are not available; only their formats and arithmetic are checked.
    let samples = score_file::read_scores(&common::fixture("field_scores.csv")).map_err(|e| e.to_string())?;
    let calibration = calibrate_threshold(&samples, 0.90).map_err(|e| e.to_string())?;
    let (_, default) = metrics::evaluate(&samples, 0.5).map_err(|e| e.to_string())?;
    let table = report::threshold_table(&[report::ThresholdTableRow::new("CNN 50 + Dropout", default, &calibration)]);
    let row = "| CNN 50 + Dropout | 92.23% | 87.37% | 96.72% | 91.81% | 0.8443 | 90.00% | 94.48% | 92.79% | 92.19% |";
    ensure!(table.lines().nth(2) == Some(row), "threshold table row {:?}", table.lines().nth(2));

    let cells = [
        (Metric::Precision, 0.8973, 0.9027, 0.0014),
        (Metric::Recall, 0.9427, 0.9469, 0.0011),
        (Metric::Accuracy, 0.9263, 0.9295, 0.0008),
        (Metric::F1, 0.9199, 0.9236, 0.0009),
    ];
    let interval = report::interval_table(&[report::IntervalTableRow { model: "CNN 50 + Dropout".into(), cells: cells.to_vec() }]);
    let expected = "| CNN 50 + Dropout | [0.8973, 0.9027] 0.0014 | [0.9427, 0.9469] 0.0011 | [0.9263, 0.9295] 0.0008 | [0.9199, 0.9236] 0.0009 |";
    ensure!(interval.lines().nth(2) == Some(expected), "interval table row {:?}", interval.lines().nth(2));

    let reports = Metric::ALL
        .iter()
        .map(|&m| bootstrap(&samples, 0.5, m, 1000, 0.05, 7))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let ours = report::interval_table(&[report::IntervalTableRow::from_reports("CNN 50 + Dropout", &reports)]);
    let golden = std::fs::read_to_string(common::fixture("field_bootstrap.txt")).map_err(|e| e.to_string())?;
    ensure!(ours == golden, "bootstrap table differs from golden");
    Ok("published values NOT reproduced (trained checkpoint and field images unavailable); \
        constructed fixture regenerates the threshold-table row and both table formats bit-exactly"
        .into())
}

fn service_round_trip() -> Outcome {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = common::reference_manifest(dir.path(), "reference-a");
        let second = common::reference_manifest(dir.path(), "reference-b");
        let config = ServiceConfig { bind_address: "127.0.0.1:0".parse().unwrap(), ..ServiceConfig::new(&first) };
        let running = service::spawn(config).await.map_err(|e| e.to_string())?;
        for _ in 0..500 {
            if running.state.current().is_some() {
                break;
            }
            tokio::time::sleep(Duration::from_millis(10)).await;
        }
        let image = std::fs::read(common::fixture("gradient.png")).map_err(|e| e.to_string())?;
        let form = |bytes: Vec<u8>| {
            reqwest::multipart::Form::new()
                .part("file", reqwest::multipart::Part::bytes(bytes).file_name("gradient.png").mime_str("image/png").unwrap())
        };
        let client = reqwest::Client::new();

        let start = Instant::now();
        let resp = client.post(running.url("/predict")).multipart(form(image.clone())).send().await.map_err(|e| e.to_string())?;
        ensure!(resp.status() == 200, "status {}", resp.status());
        let body: serde_json::Value = resp.json().await.map_err(|e| e.to_string())?;
        let wall = start.elapsed().as_millis();
        let fields: BTreeSet<&str> = body.as_object().map(|o| o.keys().map(String::as_str).collect()).unwrap_or_default();
        let want: BTreeSet<&str> = ["label", "probability_unsafe", "threshold", "model_id", "elapsed_ms"].into();
        ensure!(fields == want, "fields {fields:?}");
        let body: PredictResponse = serde_json::from_value(body).map_err(|e| e.to_string())?;
        let local = load_model_file(&first).map_err(|e| e.to_string())?.predict_bytes(&image, 0.5).map_err(|e| e.to_string())?;
        ensure!(body.label == local.label, "label {} vs in-process {}", body.label, local.label);
        ensure!((body.probability_unsafe - local.prob_unsafe).abs() < 1e-9, "probability differs");
        ensure!(body.elapsed_ms < 2000 && wall < 2000, "elapsed {} ms, wall {wall} ms", body.elapsed_ms);

        // 100 concurrent requests while the model is swapped back and forth.
        let url = Arc::new(running.url("/predict"));
        let requests: Vec<_> = (0..100)
            .map(|_| {
                let (client, url, body) = (client.clone(), url.clone(), form(image.clone()));
                tokio::spawn(async move {
                    let resp = client.post(url.as_str()).multipart(body).send().await.ok()?;
                    (resp.status() == 200).then_some(())?;
                    resp.json::<PredictResponse>().await.ok().map(|p| p.model_id)
                })
            })
            .collect();
        let reloads: Vec<_> = (0..6)
            .map(|i| {
                let manifest = if i % 2 == 0 { &second } else { &first };
                client.post(running.url("/admin/reload")).json(&serde_json::json!({ "manifest_path": manifest })).send()
            })
            .collect();
        let mut reload_ok = 0;
        for r in reloads {
            reload_ok += usize::from(r.await.map_err(|e| e.to_string())?.status() == 200);
        }
        let mut ok = 0;
        for r in requests {
            let id = r.await.ok().flatten();
            ok += usize::from(matches!(id.as_deref(), Some("reference-a" | "reference-b")));
        }
        running.shutdown().await.map_err(|e| e.to_string())?;
        ensure!(reload_ok == 6, "{reload_ok}/6 reloads succeeded");
        ensure!(ok == 100, "{ok}/100 concurrent requests succeeded with a known model_id");
        Ok(format!(
            "five-field response, label {} matches in-process, elapsed {} ms, 100/100 concurrent during 6 reloads",
            body.label, body.elapsed_ms
        ))
    })
}

fn reference_analytic() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let classifier = load_model_file(&common::reference_manifest(dir.path(), "reference")).map_err(|e| e.to_string())?;
    let black = classifier.predict(&common::uniform(50, 40, 0), 0.5).map_err(|e| e.to_string())?;
    let white = classifier.predict(&common::uniform(50, 40, 255), 0.5).map_err(|e| e.to_string())?;
    let mid = classifier.predict_tensor(&InputTensor::filled(224, 0.5), 0.5).map_err(|e| e.to_string())?;
    ensure!(black.label == Label::Unsafe, "black → {}", black.label);
    ensure!(white.label == Label::Safe, "white → {}", white.label);
    ensure!(mid.prob_unsafe == 0.5 && mid.label == Label::Unsafe, "mid-gray → {} p={}", mid.label, mid.prob_unsafe);
    // Closed form: p_unsafe = 1 / (1 + e^{20(m − 0.5)}).
    let expected_black = 1.0 / (1.0 + (-10.0f64).exp());
    ensure!((black.prob_unsafe - expected_black).abs() < 1e-9, "black p={}", black.prob_unsafe);
    Ok(format!("black → unsafe (p={:.6}), white → safe (p={:.6}), m = 0.5 → p = 0.5 unsafe", black.prob_unsafe, white.prob_unsafe))
}
