// Split a labeled folder before augmenting, then augment each split on its own
// to fixed totals. Only provenance records are produced here; pass an output
// root to `augment_splits` to also write the PNGs.
//
//     cargo run --example dataset_split

use std::collections::BTreeMap;
use std::error::Error;

use microbe_screen::augment::Raster;
use microbe_screen::dataset::{self, LabelingRule, Split, SplitAugment, SplitRatios};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    for (label, n) in [("safe", 151), ("unsafe", 146)] {
        let folder = dir.path().join(label);
        std::fs::create_dir_all(&folder)?;
        for i in 0..n {
            let shade = (i * 7 % 256) as u8;
            Raster::new(8, 8, 3, vec![shade; 8 * 8 * 3])?.to_dynamic().save(folder.join(format!("{label}_{i:03}.png")))?;
        }
    }

    let report = dataset::ingest(dir.path(), &LabelingRule::ClassFolders)?;
    let manifest = dataset::split(&report.samples, SplitRatios::default(), 2024)?;
    println!("originals {:?}", manifest.split_counts());
    assert!(manifest.violations().is_empty());

    let plans: BTreeMap<Split, SplitAugment> = [
        (Split::Train, SplitAugment::total(19_530)),
        (Split::Validation, SplitAugment::total(6_905)),
        (Split::Test, SplitAugment::total(3_590)),
    ]
    .into_iter()
    .collect();
    let augmented = dataset::augment_splits(&manifest, &plans, None)?;
    println!("augmented {:?}", augmented.augmented_counts());
    assert!(augmented.violations().is_empty());
    augmented.save(&dir.path().join("manifest.json"))?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
