//! Tile-swap augmentation.
//!
//! An image is center-cropped to a square whose side is a multiple of 4 and
//! cut into a 4×4 grid. Each augmented copy rearranges the tiles with a
//! permutation built from k random swaps, k drawn uniformly from
//! `[min_swaps, max_swaps]`. Tile contents are copied untouched, so the pixel
//! multiset of the image is preserved exactly.

mod permutation;
mod raster;

use std::collections::HashSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use permutation::{
    count_reachable, count_reachable_exact, cycle_decomposition, sample_permutation, TilePermutation,
};
pub use raster::{apply_permutation, make_square, Raster, SquareImage};

use crate::seed::rng_from_seed;

pub const GRID_SIDE: u32 = 4;
pub const TILE_COUNT: usize = (GRID_SIDE * GRID_SIDE) as usize;

/// Rejected draws allowed per requested output before giving up.
pub const COLLISION_BUDGET_FACTOR: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("image {width}x{height} is too small; both sides must be at least {GRID_SIDE}")]
    ImageTooSmall { width: u32, height: u32 },
    #[error("raster {width}x{height} is not a square with side divisible by {GRID_SIDE}")]
    GeometryMismatch { width: u32, height: u32 },
    #[error("grid side {0} is not supported (only 4)")]
    UnsupportedGrid(u32),
    #[error("invalid augmentation config: {0}")]
    InvalidConfig(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("gave up after {rejected} duplicate draws with {produced} of {requested} distinct permutations")]
    CollisionBudgetExhausted { requested: usize, produced: usize, rejected: usize },
    #[error("image error for {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("i/o error for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AugmentError {
    pub fn code(&self) -> &'static str {
        match self {
            AugmentError::ImageTooSmall { .. } => "image_too_small",
            AugmentError::GeometryMismatch { .. } => "geometry_mismatch",
            AugmentError::UnsupportedGrid(_) => "unsupported_grid",
            AugmentError::InvalidConfig(_) => "invalid_config",
            AugmentError::InvalidPermutation(_) => "invalid_permutation",
            AugmentError::InvalidRaster(_) => "invalid_raster",
            AugmentError::CollisionBudgetExhausted { .. } => "collision_budget_exhausted",
            AugmentError::Image { .. } => "unreadable_image",
            AugmentError::Io { .. } => "io_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub grid_side: u32,
    pub min_swaps: u32,
    pub max_swaps: u32,
    pub count_per_image: usize,
    pub seed: u64,
    pub allow_identity: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            grid_side: GRID_SIDE,
            min_swaps: 4,
            max_swaps: 12,
            count_per_image: 1,
            seed: 0,
            allow_identity: true,
        }
    }
}

impl AugmentConfig {
    pub fn with_count(count_per_image: usize, seed: u64) -> Self {
        AugmentConfig { count_per_image, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.grid_side != GRID_SIDE {
            return Err(AugmentError::UnsupportedGrid(self.grid_side));
        }
        if self.min_swaps < 4 || self.min_swaps > self.max_swaps {
            return Err(AugmentError::InvalidConfig(format!(
                "swap range [{}, {}] must satisfy 4 <= min <= max",
                self.min_swaps, self.max_swaps
            )));
        }
        let space = count_reachable(self.grid_side)?;
        if self.count_per_image as u64 > space {
            return Err(AugmentError::InvalidConfig(format!(
                "{} permutations requested, only {space} exist",
                self.count_per_image
            )));
        }
        Ok(())
    }
}

/// One augmented image and the permutation that produced it.
#[derive(Debug, Clone)]
pub struct Augmentation {
    pub image: SquareImage,
    pub permutation: TilePermutation,
}

/// Draws `count_per_image` pairwise-distinct permutations from `config.seed`.
///
/// Duplicates (and the identity, unless allowed) are redrawn; more than
/// `100 · count_per_image` rejections yields `CollisionBudgetExhausted`.
pub fn plan_permutations(config: &AugmentConfig) -> Result<Vec<TilePermutation>, AugmentError> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    draw_distinct(config.count_per_image, config.allow_identity, || sample_permutation(&mut rng, config))
}

fn draw_distinct(
    requested: usize,
    allow_identity: bool,
    mut draw: impl FnMut() -> TilePermutation,
) -> Result<Vec<TilePermutation>, AugmentError> {
    let budget = COLLISION_BUDGET_FACTOR * requested;
    let mut seen = HashSet::with_capacity(requested);
    let mut out = Vec::with_capacity(requested);
    let mut rejected = 0usize;
    while out.len() < requested {
        let perm = draw();
        if (!allow_identity && perm.is_identity()) || !seen.insert(perm.signature()) {
            rejected += 1;
            if rejected > budget {
                return Err(AugmentError::CollisionBudgetExhausted { requested, produced: out.len(), rejected });
            }
            continue;
        }
        out.push(perm);
    }
    Ok(out)
}

/// Squares `image` and produces `count_per_image` tile arrangements of it.
pub fn generate_augmentations(image: &Raster, config: &AugmentConfig) -> Result<Vec<Augmentation>, AugmentError> {
    let perms = plan_permutations(config)?;
    let square = make_square(image)?;
    Ok(perms
        .into_iter()
        .map(|permutation| Augmentation { image: apply_permutation(&square, &permutation), permutation })
        .collect())
}

/// One line of the sidecar permutation log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationRecord {
    pub output: String,
    pub mapping: [u8; TILE_COUNT],
    pub k: u32,
    pub seed: u64,
}

/// Output file name for augmentation `index` of an image with file stem `stem`.
pub fn output_file_name(stem: &str, index: usize) -> String {
    format!("{stem}__p{index}.png")
}

/// Writes each augmentation as `{stem}__p{index}.png` under `dir`, plus a
/// `{stem}.permutations.jsonl` log with one record per output.
pub fn write_augmentations(
    dir: &Path,
    stem: &str,
    augmentations: &[Augmentation],
    seed: u64,
) -> Result<Vec<PermutationRecord>, AugmentError> {
    fs::create_dir_all(dir).map_err(|source| AugmentError::Io { path: dir.to_path_buf(), source })?;
    let mut records = Vec::with_capacity(augmentations.len());
    for (index, aug) in augmentations.iter().enumerate() {
        let name = output_file_name(stem, index);
        let path = dir.join(&name);
        aug.image
            .to_dynamic()
            .save_with_format(&path, image::ImageFormat::Png)
            .map_err(|source| AugmentError::Image { path: path.clone(), source })?;
        records.push(PermutationRecord {
            output: name,
            mapping: *aug.permutation.mapping(),
            k: aug.permutation.transpositions(),
            seed,
        });
    }
    let log_path = dir.join(format!("{stem}.permutations.jsonl"));
    let io_err = |source| AugmentError::Io { path: log_path.clone(), source };
    let mut log = BufWriter::new(fs::File::create(&log_path).map_err(io_err)?);
    for record in &records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(log, "{line}").map_err(io_err)?;
    }
    log.flush().map_err(io_err)?;
    Ok(records)
}
