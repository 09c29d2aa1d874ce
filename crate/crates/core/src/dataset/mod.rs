//! Dataset construction: ingest labeled images, split them by label before any
//! augmentation, then augment each split on its own so that no arrangement of
//! an original ever lands in two splits.
//!
//! The manifest written here is the reproducibility record. Augmented images
//! are described by their permutation and output path, so a split or a field
//! set can be rebuilt from the originals and the seeds alone; writing the
//! PNGs is optional.

mod ingest;
mod manifest;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;

pub(crate) use ingest::has_image_extension;
pub use ingest::{ingest, list_labeled_files, ImageSample, IngestReport, LabelingRule, UnreadableImage};
pub use manifest::{
    AuditRecord, AugmentedRecord, DatasetManifest, FieldEntry, FieldManifest, ManifestEntry, ManifestViolation,
    Split, SplitAugment, SplitRatios, MANIFEST_VERSION,
};

use crate::augment::{self, apply_permutation, make_square, AugmentConfig, AugmentError, Raster, TilePermutation};
use crate::seed::{derive_seed, rng_from_seed};
use crate::Label;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("no decodable images under {root} ({unreadable} unreadable)")]
    EmptyDataset { root: PathBuf, unreadable: usize },
    #[error("{0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("class {label} has {have} samples, needs at least {need} to populate every split")]
    InsufficientSamples { label: Label, have: usize, need: usize },
    #[error("{0} appears more than once")]
    DuplicateSample(PathBuf),
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("label index {path}: {message}")]
    Index { path: PathBuf, message: String },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("augmenting {path}: {source}")]
    Augment {
        path: PathBuf,
        #[source]
        source: AugmentError,
    },
    #[error("i/o error for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::EmptyDataset { .. } => "empty_dataset",
            DatasetError::NotADirectory(_) => "not_a_directory",
            DatasetError::InsufficientSamples { .. } => "insufficient_samples",
            DatasetError::DuplicateSample(_) => "duplicate_sample",
            DatasetError::InvalidRatios(_) => "invalid_ratios",
            DatasetError::Index { .. } => "invalid_index",
            DatasetError::Manifest { .. } => "invalid_manifest",
            DatasetError::Augment { source, .. } => source.code(),
            DatasetError::Io { .. } => "io_error",
        }
    }
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn path_key(path: &Path) -> String {
    path.to_string_lossy().replace('\\', "/")
}

/// Number of samples of one class assigned to each split.
///
/// Validation and test take `ceil(ratio · n)`; train takes the remainder.
/// For 297 images split 151/146 this reproduces the 205/61/31 split.
pub fn allocate(n: usize, ratios: &SplitRatios) -> BTreeMap<Split, usize> {
    let share = |r: f64| ((r * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let validation = share(ratios.validation);
    let test = share(ratios.test);
    let train = n.saturating_sub(validation + test);
    BTreeMap::from([(Split::Train, train), (Split::Validation, validation), (Split::Test, test)])
}

/// Stratified split. Samples of each class are ordered by path, shuffled with a
/// stream derived from `seed` and the class name, then cut per [`allocate`].
pub fn split(samples: &[ImageSample], ratios: SplitRatios, seed: u64) -> Result<DatasetManifest, DatasetError> {
    ratios.validate()?;
    let needed = Split::ALL.iter().filter(|s| ratios.get(**s) > 0.0).count();
    let mut by_class: BTreeMap<Label, Vec<&ImageSample>> = Label::ALL.iter().map(|l| (*l, Vec::new())).collect();
    for s in samples {
        by_class.entry(s.label).or_default().push(s);
    }
    let mut unique = std::collections::HashSet::with_capacity(samples.len());
    if let Some(dup) = samples.iter().find(|s| !unique.insert(s.path.as_path())) {
        return Err(DatasetError::DuplicateSample(dup.path.clone()));
    }
    let mut assignment: HashMap<&Path, Split> = HashMap::with_capacity(samples.len());
    for (label, mut members) in by_class {
        let counts = allocate(members.len(), &ratios);
        let short = members.len() < needed
            || Split::ALL.iter().any(|s| ratios.get(*s) > 0.0 && counts[s] == 0);
        if short {
            return Err(DatasetError::InsufficientSamples { label, have: members.len(), need: needed });
        }
        members.sort_by(|a, b| a.path.cmp(&b.path));
        let mut rng = rng_from_seed(derive_seed(seed, &format!("split/{label}")));
        members.shuffle(&mut rng);
        let mut cursor = members.into_iter();
        for split in Split::ALL {
            for sample in cursor.by_ref().take(counts[&split]) {
                assignment.insert(sample.path.as_path(), split);
            }
        }
    }
    let mut entries: Vec<ManifestEntry> = samples
        .iter()
        .map(|s| ManifestEntry { sample: s.clone(), split: assignment[s.path.as_path()], augmented: Vec::new() })
        .collect();
    entries.sort_by(|a, b| a.sample.path.cmp(&b.sample.path));
    Ok(DatasetManifest {
        version: MANIFEST_VERSION,
        global_seed: seed,
        split_ratios: ratios,
        augment_config: BTreeMap::new(),
        created_at: now_rfc3339(),
        entries,
        audit: Vec::new(),
    })
}

/// File stems for output naming; stems shared by several originals get a short
/// path hash appended so output paths never collide.
pub(crate) fn unique_stems<'a>(paths: impl Iterator<Item = &'a Path> + Clone) -> HashMap<&'a Path, String> {
    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".into());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for p in paths.clone() {
        *seen.entry(stem(p)).or_default() += 1;
    }
    paths
        .map(|p| {
            let s = stem(p);
            let name = if seen[&s] > 1 { format!("{s}-{:08x}", derive_seed(0, &path_key(p)) as u32) } else { s };
            (p, name)
        })
        .collect()
}

struct PlannedImage<'a> {
    original: &'a Path,
    dir: String,
    stem: String,
    config: AugmentConfig,
}

fn plan_records(plan: &PlannedImage<'_>) -> Result<(Vec<TilePermutation>, Vec<AugmentedRecord>), DatasetError> {
    let perms = augment::plan_permutations(&plan.config)
        .map_err(|source| DatasetError::Augment { path: plan.original.to_path_buf(), source })?;
    let records = perms
        .iter()
        .enumerate()
        .map(|(i, p)| AugmentedRecord {
            mapping: *p.mapping(),
            k: p.transpositions(),
            output_path: format!("{}/{}", plan.dir, augment::output_file_name(&plan.stem, i)),
        })
        .collect();
    Ok((perms, records))
}

fn materialize(
    plan: &PlannedImage<'_>,
    perms: &[TilePermutation],
    records: &[AugmentedRecord],
    root: &Path,
) -> Result<(), DatasetError> {
    if perms.is_empty() {
        return Ok(());
    }
    let augment_err = |source| DatasetError::Augment { path: plan.original.to_path_buf(), source };
    let decoded = image::open(plan.original)
        .map_err(|source| augment_err(AugmentError::Image { path: plan.original.to_path_buf(), source }))?;
    let square = make_square(&Raster::from_dynamic(&decoded)).map_err(augment_err)?;
    let dir = root.join(&plan.dir);
    std::fs::create_dir_all(&dir).map_err(|source| DatasetError::Io { path: dir.clone(), source })?;
    for (perm, rec) in perms.iter().zip(records) {
        let out = root.join(&rec.output_path);
        apply_permutation(&square, perm)
            .to_dynamic()
            .save_with_format(&out, image::ImageFormat::Png)
            .map_err(|source| augment_err(AugmentError::Image { path: out.clone(), source }))?;
    }
    Ok(())
}

fn run_plans(plans: &[PlannedImage<'_>], output_root: Option<&Path>) -> Result<Vec<Vec<AugmentedRecord>>, DatasetError> {
    plans
        .par_iter()
        .map(|plan| {
            let (perms, records) = plan_records(plan)?;
            if let Some(root) = output_root {
                materialize(plan, &perms, &records, root)?;
            }
            Ok(records)
        })
        .collect()
}

/// Augments each split independently. Every augmented record inherits its
/// original's split and label and is placed under `{split}/{label}/`.
///
/// With `output_root`, the PNGs are also written there; otherwise only the
/// provenance records are produced. Any existing augmentation records are replaced.
pub fn augment_splits(
    manifest: &DatasetManifest,
    plans: &BTreeMap<Split, SplitAugment>,
    output_root: Option<&Path>,
) -> Result<DatasetManifest, DatasetError> {
    let stems = unique_stems(manifest.entries.iter().map(|e| e.sample.path.as_path()));
    let mut per_entry_count = vec![0usize; manifest.entries.len()];
    for split in Split::ALL {
        let plan = plans.get(&split).cloned().unwrap_or_default();
        let idx: Vec<usize> = (0..manifest.entries.len()).filter(|&i| manifest.entries[i].split == split).collect();
        for (i, count) in idx.iter().zip(plan.counts(idx.len())) {
            per_entry_count[*i] = count;
        }
    }
    let work: Vec<PlannedImage<'_>> = manifest
        .entries
        .iter()
        .zip(&per_entry_count)
        .map(|(entry, &count)| {
            let plan = plans.get(&entry.split).cloned().unwrap_or_default();
            let seed = derive_seed(manifest.global_seed, &path_key(&entry.sample.path));
            PlannedImage {
                original: &entry.sample.path,
                dir: format!("{}/{}", entry.split, entry.sample.label),
                stem: stems[entry.sample.path.as_path()].clone(),
                config: plan.config(count, seed),
            }
        })
        .collect();
    let records = run_plans(&work, output_root)?;

    let mut out = manifest.clone();
    for (entry, recs) in out.entries.iter_mut().zip(records) {
        entry.augmented = recs;
    }
    out.augment_config = Split::ALL.iter().map(|s| (*s, plans.get(s).cloned().unwrap_or_default())).collect();
    out.audit.push(AuditRecord {
        operation: "augment_splits".into(),
        per_split: out.augmented_counts(),
        materialized: output_root.is_some(),
    });
    Ok(out)
}

/// Expands a field-test set: `count` distinct tile arrangements of every
/// original, placed under `field/{label}/`.
pub fn expand_field_set(
    samples: &[ImageSample],
    count: usize,
    seed: u64,
    output_root: Option<&Path>,
) -> Result<FieldManifest, DatasetError> {
    let mut samples: Vec<ImageSample> = samples.to_vec();
    samples.sort_by(|a, b| a.path.cmp(&b.path));
    let stems = unique_stems(samples.iter().map(|s| s.path.as_path()));
    let work: Vec<PlannedImage<'_>> = samples
        .iter()
        .map(|s| {
            let image_seed = derive_seed(seed, &path_key(&s.path));
            PlannedImage {
                original: &s.path,
                dir: format!("field/{}", s.label),
                stem: stems[s.path.as_path()].clone(),
                config: AugmentConfig::with_count(count, image_seed),
            }
        })
        .collect();
    let records = run_plans(&work, output_root)?;
    let entries = samples
        .iter()
        .zip(records)
        .map(|(s, augmented)| FieldEntry { sample: s.clone(), augmented })
        .collect();
    Ok(FieldManifest { version: MANIFEST_VERSION, global_seed: seed, count_per_image: count, created_at: now_rfc3339(), entries })
}
