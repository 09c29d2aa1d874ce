// Tile-swap augmentation of one image: square it, draw distinct 4×4 tile
// arrangements from a seed, write the PNGs and the permutation log.
//
//     cargo run --example tile_augmentation

use std::error::Error;

use microbe_screen::augment::{self, AugmentConfig, Raster};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // 200×160 gradient; make_square crops it to 160×160.
    let (w, h) = (200u32, 160u32);
    let pixels = (0..h).flat_map(|y| (0..w).flat_map(move |x| [(x % 256) as u8, (y % 256) as u8, 128])).collect();
    let image = Raster::new(w, h, 3, pixels)?;

    let config = AugmentConfig { count_per_image: 8, seed: 42, allow_identity: false, ..AugmentConfig::default() };
    let augs = augment::generate_augmentations(&image, &config)?;
    assert_eq!(augs.len(), 8);

    let dir = tempfile::tempdir()?;
    let records = augment::write_augmentations(dir.path(), "gradient", &augs, config.seed)?;
    for (aug, rec) in augs.iter().zip(&records) {
        let parity = if aug.permutation.is_even() { "even" } else { "odd" };
        println!("{} k={:<2} {parity:<4} {:?}", rec.output, rec.k, rec.mapping);
        assert_eq!(aug.image.side(), 160);
    }

    // Same seed, same arrangements.
    let again = augment::plan_permutations(&config)?;
    assert!(again.iter().zip(&augs).all(|(p, a)| p == &a.permutation));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
