use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DatasetError, ImageSample};
use crate::augment::{AugmentConfig, TILE_COUNT};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.70, validation: 0.20, test: 0.10 }
    }
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self, DatasetError> {
        let ratios = SplitRatios { train, validation, test };
        ratios.validate()?;
        Ok(ratios)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(DatasetError::InvalidRatios(format!("{self:?} has a negative or non-finite part")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DatasetError::InvalidRatios(format!("{self:?} sums to {sum}, expected 1")));
        }
        Ok(())
    }

    pub fn get(&self, split: Split) -> f64 {
        match split {
            Split::Train => self.train,
            Split::Validation => self.validation,
            Split::Test => self.test,
        }
    }
}

/// Augmentation settings for one split.
///
/// `target_total`, when set, overrides `count_per_image`: the total is spread
/// over the split's originals as evenly as possible, the first
/// `target_total mod n` originals (in manifest order) taking one extra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAugment {
    pub count_per_image: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_total: Option<usize>,
    pub min_swaps: u32,
    pub max_swaps: u32,
    pub allow_identity: bool,
}

impl Default for SplitAugment {
    fn default() -> Self {
        let base = AugmentConfig::default();
        SplitAugment {
            count_per_image: 0,
            target_total: None,
            min_swaps: base.min_swaps,
            max_swaps: base.max_swaps,
            allow_identity: base.allow_identity,
        }
    }
}

impl SplitAugment {
    pub fn per_image(count: usize) -> Self {
        SplitAugment { count_per_image: count, ..Default::default() }
    }

    pub fn total(target: usize) -> Self {
        SplitAugment { target_total: Some(target), ..Default::default() }
    }

    /// Per-original counts for a split holding `originals` images.
    pub fn counts(&self, originals: usize) -> Vec<usize> {
        match self.target_total {
            Some(total) if originals > 0 => {
                let base = total / originals;
                let extra = total % originals;
                (0..originals).map(|i| base + usize::from(i < extra)).collect()
            }
            Some(_) => Vec::new(),
            None => vec![self.count_per_image; originals],
        }
    }

    pub fn config(&self, count_per_image: usize, seed: u64) -> AugmentConfig {
        AugmentConfig {
            count_per_image,
            seed,
            min_swaps: self.min_swaps,
            max_swaps: self.max_swaps,
            allow_identity: self.allow_identity,
            ..AugmentConfig::default()
        }
    }
}

/// Provenance of one augmented image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedRecord {
    pub mapping: [u8; TILE_COUNT],
    pub k: u32,
    pub output_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub sample: ImageSample,
    pub split: Split,
    #[serde(default)]
    pub augmented: Vec<AugmentedRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub operation: String,
    pub per_split: BTreeMap<Split, usize>,
    pub materialized: bool,
}

/// The reproducibility record of a split (and, later, its augmentation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub global_seed: u64,
    pub split_ratios: SplitRatios,
    #[serde(default)]
    pub augment_config: BTreeMap<Split, SplitAugment>,
    pub created_at: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub audit: Vec<AuditRecord>,
}

/// A broken provenance or assignment invariant found by [`DatasetManifest::violations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManifestViolation {
    DuplicateOriginal(PathBuf),
    DuplicateOutput(String),
    CrossSplitOutput { original: PathBuf, split: Split, output_path: String },
    InvalidMapping { original: PathBuf, output_path: String },
}

impl DatasetManifest {
    pub fn split_counts(&self) -> BTreeMap<Split, usize> {
        let mut counts: BTreeMap<Split, usize> = Split::ALL.iter().map(|s| (*s, 0)).collect();
        for e in &self.entries {
            *counts.entry(e.split).or_default() += 1;
        }
        counts
    }

    pub fn augmented_counts(&self) -> BTreeMap<Split, usize> {
        let mut counts: BTreeMap<Split, usize> = Split::ALL.iter().map(|s| (*s, 0)).collect();
        for e in &self.entries {
            *counts.entry(e.split).or_default() += e.augmented.len();
        }
        counts
    }

    pub fn entries_in(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Full provenance scan: each original appears once, every output path is
    /// unique and lives under its original's split directory, every mapping is a
    /// bijection.
    pub fn violations(&self) -> Vec<ManifestViolation> {
        let mut out = Vec::new();
        let mut originals = HashSet::new();
        let mut outputs = HashSet::new();
        for entry in &self.entries {
            if !originals.insert(&entry.sample.path) {
                out.push(ManifestViolation::DuplicateOriginal(entry.sample.path.clone()));
            }
            let prefix = format!("{}/", entry.split.as_str());
            for rec in &entry.augmented {
                if !outputs.insert(rec.output_path.as_str()) {
                    out.push(ManifestViolation::DuplicateOutput(rec.output_path.clone()));
                }
                if !rec.output_path.starts_with(&prefix) {
                    out.push(ManifestViolation::CrossSplitOutput {
                        original: entry.sample.path.clone(),
                        split: entry.split,
                        output_path: rec.output_path.clone(),
                    });
                }
                if crate::augment::TilePermutation::from_mapping(rec.mapping, rec.k).is_err() {
                    out.push(ManifestViolation::InvalidMapping {
                        original: entry.sample.path.clone(),
                        output_path: rec.output_path.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        save_json(self, path)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        load_json(path)
    }
}

/// Manifest of a field-test expansion: every original gets the same number of
/// tile arrangements, labels inherited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldManifest {
    pub version: u32,
    pub global_seed: u64,
    pub count_per_image: usize,
    pub created_at: String,
    pub entries: Vec<FieldEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldEntry {
    #[serde(flatten)]
    pub sample: ImageSample,
    pub augmented: Vec<AugmentedRecord>,
}

impl FieldManifest {
    pub fn total_augmented(&self) -> usize {
        self.entries.iter().map(|e| e.augmented.len()).sum()
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        save_json(self, path)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        load_json(path)
    }
}

fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), DatasetError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| DatasetError::Io { path: parent.to_path_buf(), source })?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| DatasetError::Manifest { path: path.to_path_buf(), message: e.to_string() })
}
