// Expand a small field-test set into 625 distinct arrangements per original.
//
//     cargo run --example field_set

use std::collections::HashSet;
use std::error::Error;

use microbe_screen::augment::Raster;
use microbe_screen::dataset::{self, LabelingRule};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    for (label, n) in [("safe", 3), ("unsafe", 2)] {
        std::fs::create_dir_all(dir.path().join(label))?;
        for i in 0..n {
            Raster::new(32, 24, 3, vec![40 * i as u8; 32 * 24 * 3])?
                .to_dynamic()
                .save(dir.path().join(label).join(format!("f{i}.png")))?;
        }
    }
    let samples = dataset::list_labeled_files(dir.path(), &LabelingRule::ClassFolders)?;
    let out = dir.path().join("expanded");
    let field = dataset::expand_field_set(&samples, 625, 7, Some(&out))?;
    println!("{} originals, {} augmented", field.entries.len(), field.total_augmented());
    for entry in &field.entries {
        let distinct: HashSet<_> = entry.augmented.iter().map(|r| r.mapping).collect();
        assert_eq!(distinct.len(), 625);
    }
    assert!(out.join(&field.entries[0].augmented[624].output_path).is_file());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
