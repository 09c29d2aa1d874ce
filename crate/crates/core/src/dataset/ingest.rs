use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::DatasetError;
use crate::Label;

/// One labeled microscope image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSample {
    pub path: PathBuf,
    pub label: Label,
    pub source_id: String,
    /// Methylene blue staining; metadata only.
    pub stained: bool,
}

/// How labels are attached to files under an ingest root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelingRule {
    /// `root/safe/**` and `root/unsafe/**`. The source id is the immediate
    /// parent directory when nested below the class folder, else the class name.
    ClassFolders,
    /// A CSV index with header `path,label,source_id,stained`; paths are relative to the root.
    IndexFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnreadableImage {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub samples: Vec<ImageSample>,
    pub unreadable: Vec<UnreadableImage>,
}

const IMAGE_EXTENSIONS: [&str; 7] = ["png", "jpg", "jpeg", "bmp", "tif", "tiff", "webp"];

pub(crate) fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

#[derive(Debug, Deserialize)]
struct IndexRow {
    path: PathBuf,
    label: Label,
    #[serde(default)]
    source_id: String,
    #[serde(default)]
    stained: bool,
}

/// Lists labeled image files without decoding them, sorted by path.
pub fn list_labeled_files(root: &Path, rule: &LabelingRule) -> Result<Vec<ImageSample>, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::NotADirectory(root.to_path_buf()));
    }
    let mut samples = match rule {
        LabelingRule::ClassFolders => {
            let mut samples = Vec::new();
            for label in Label::ALL {
                let class_dir = root.join(label.as_str());
                if !class_dir.is_dir() {
                    continue;
                }
                for entry in WalkDir::new(&class_dir).follow_links(true) {
                    let entry = entry.map_err(|e| DatasetError::Io {
                        path: class_dir.clone(),
                        source: e.into(),
                    })?;
                    if !entry.file_type().is_file() || !has_image_extension(entry.path()) {
                        continue;
                    }
                    let parent = entry.path().parent().unwrap_or(&class_dir);
                    let source_id = if parent == class_dir {
                        label.as_str().to_string()
                    } else {
                        parent.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
                    };
                    samples.push(ImageSample {
                        path: entry.path().to_path_buf(),
                        label,
                        source_id,
                        stained: false,
                    });
                }
            }
            samples
        }
        LabelingRule::IndexFile(index) => {
            let mut reader = csv::Reader::from_path(index)
                .map_err(|e| DatasetError::Index { path: index.clone(), message: e.to_string() })?;
            let mut samples = Vec::new();
            for row in reader.deserialize::<IndexRow>() {
                let row = row.map_err(|e| DatasetError::Index { path: index.clone(), message: e.to_string() })?;
                samples.push(ImageSample {
                    path: root.join(row.path),
                    label: row.label,
                    source_id: row.source_id,
                    stained: row.stained,
                });
            }
            samples
        }
    };
    samples.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(samples)
}

/// Lists and decodes every labeled image under `root`.
///
/// Files that fail to decode are collected in [`IngestReport::unreadable`];
/// `EmptyDataset` is returned only when nothing decodes.
pub fn ingest(root: &Path, rule: &LabelingRule) -> Result<IngestReport, DatasetError> {
    let candidates = list_labeled_files(root, rule)?;
    let checked: Vec<Result<ImageSample, UnreadableImage>> = candidates
        .into_par_iter()
        .map(|sample| match decode_check(&sample.path) {
            Ok(()) => Ok(sample),
            Err(reason) => Err(UnreadableImage { path: sample.path, reason }),
        })
        .collect();
    let mut report = IngestReport::default();
    for item in checked {
        match item {
            Ok(s) => report.samples.push(s),
            Err(u) => report.unreadable.push(u),
        }
    }
    if report.samples.is_empty() {
        return Err(DatasetError::EmptyDataset { root: root.to_path_buf(), unreadable: report.unreadable.len() });
    }
    Ok(report)
}

fn decode_check(path: &Path) -> Result<(), String> {
    let bytes = fs::read(path).map_err(|e| e.to_string())?;
    image::load_from_memory(&bytes).map(|_| ()).map_err(|e| e.to_string())
}
