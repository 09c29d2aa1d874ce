// Pick the threshold with the highest recall whose precision is at least 0.90,
// and report it next to the default threshold.
//
//     cargo run --example calibrate_threshold

use std::error::Error;
use std::path::Path;

use microbe_screen::metrics::{self, report, score_file};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/field_scores.csv");
    let samples = score_file::read_scores(&path)?;

    let calibration = metrics::calibrate_threshold(&samples, 0.90)?;
    let (_, default) = metrics::evaluate(&samples, 0.5)?;
    println!(
        "threshold {} precision {} recall {}",
        report::threshold_cell(calibration.threshold),
        report::percent(calibration.precision),
        report::percent(calibration.recall)
    );
    assert!(calibration.precision >= 0.90);

    let row = report::ThresholdTableRow::new("CNN 50 + Dropout", default, &calibration);
    print!("{}", report::threshold_table(&[row]));

    match metrics::calibrate_threshold(&samples, 0.999) {
        Err(e) => println!("0.999: {e}"),
        Ok(c) => println!("0.999: threshold {}", c.threshold),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
