// Write a score file, read it back, and evaluate at a fixed threshold.
//
//     cargo run --example evaluate_scores

use std::error::Error;

use microbe_screen::metrics::{self, report, score_file, ScoredSample};
use microbe_screen::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = (0..400)
        .map(|_| {
            let truth = if rng.random_bool(0.45) { Label::Unsafe } else { Label::Safe };
            let centre = if truth.is_unsafe() { 0.75 } else { 0.25 };
            let p: f64 = (centre + rng.random_range(-0.3..0.3f64)).clamp(0.0, 1.0);
            ScoredSample::new(truth, (p * 1e4).round() / 1e4)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("scores.csv");
    score_file::save_scores(&path, &samples)?;
    let loaded = score_file::read_scores(&path)?;
    assert_eq!(loaded, samples);

    let (counts, summary) = metrics::evaluate(&loaded, 0.5)?;
    println!("{counts:?}");
    print!("{}", report::metric_lines(&summary));

    let curve = metrics::pr_curve(&loaded)?;
    println!("{} points on the precision-recall curve", curve.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
