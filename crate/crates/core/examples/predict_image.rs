// Single-image prediction through a model manifest. The reference backend
// needs no model file: it scores images by mean intensity.
//
//     cargo run --example predict_image

use std::error::Error;

use microbe_screen::augment::Raster;
use microbe_screen::classify::{self, ModelManifest};
use microbe_screen::Label;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let manifest_path = dir.path().join("model.json");
    ModelManifest::reference("reference-v1").save(&manifest_path)?;
    let classifier = classify::load_model_file(&manifest_path)?;

    for shade in [0u8, 100, 128, 160, 255] {
        let image = Raster::new(300, 200, 3, vec![shade; 300 * 200 * 3])?;
        let p = classifier.predict(&image, classifier.default_threshold())?;
        println!("shade {shade:>3}: {} p={:.6} logits {:?}", p.label, p.prob_unsafe, p.logits);
    }
    let black = classifier.predict(&Raster::new(4, 4, 1, vec![0; 16])?, 0.5)?;
    assert_eq!(black.label, Label::Unsafe);

    let path = dir.path().join("white.png");
    Raster::new(64, 64, 3, vec![255; 64 * 64 * 3])?.to_dynamic().save(&path)?;
    assert_eq!(classifier.predict_file(&path, 0.5)?.label, Label::Safe);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
