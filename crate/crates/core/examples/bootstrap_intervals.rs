// Percentile bootstrap intervals for all four metrics.
//
//     cargo run --example bootstrap_intervals

use std::error::Error;

use microbe_screen::metrics::{self, report, Metric, ScoredSample};
use microbe_screen::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples = (0..1000)
        .map(|_| {
            let truth = if rng.random_bool(0.5) { Label::Unsafe } else { Label::Safe };
            let right = rng.random_bool(0.9);
            ScoredSample::new(truth, if truth.is_unsafe() == right { 0.8 } else { 0.2 })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let reports = Metric::ALL
        .iter()
        .map(|&m| metrics::bootstrap(&samples, 0.5, m, 1000, 0.05, 1))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        println!("{:<9} point {:.4} trimmed {} per tail", r.metric_name, r.point, r.trimmed_per_tail);
        assert!(r.ci_low <= r.point && r.point <= r.ci_high);
    }
    print!("{}", report::interval_table(&[report::IntervalTableRow::from_reports("example", &reports)]));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
