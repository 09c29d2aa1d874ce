//! From image bytes to a `safe`/`unsafe` decision.
//!
//! [`preprocess`] crops the center square, resizes it bilinearly to the model
//! side (224 by default) and normalizes each channel. A backend turns the
//! tensor into two logits, [`softmax`] turns those into probabilities, and the
//! inclusive threshold rule picks the label.

mod backend;
mod preprocess;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use backend::{reference_infer, Access, InferenceBackend, ReferenceBackend, REFERENCE_GAIN, REFERENCE_MIDPOINT};
#[cfg(feature = "onnx")]
pub use backend::OnnxBackend;
pub use preprocess::{decode, preprocess, preprocess_bytes, softmax, InputTensor};

use crate::augment::Raster;
use crate::dataset::{self, DatasetError, ImageSample, LabelingRule, UnreadableImage};
use crate::metrics::ScoredSample;
use crate::Label;

pub const DEFAULT_INPUT_SIDE: u32 = 224;
pub const IMAGENET_MEANS: [f64; 3] = [0.485, 0.456, 0.406];
pub const IMAGENET_STDS: [f64; 3] = [0.229, 0.224, 0.225];
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("cannot decode image: {0}")]
    UndecodableImage(String),
    #[error("non-finite logits {0:?}")]
    NonFiniteLogits([f64; 2]),
    #[error("model file {0} not found")]
    ModelFileMissing(PathBuf),
    #[error("model incompatible: {0}")]
    ModelIncompatible(String),
    #[error("invalid model manifest: {0}")]
    InvalidManifest(String),
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("inference failed: {0}")]
    Runtime(String),
    #[error("i/o error for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl ClassifyError {
    pub fn code(&self) -> &'static str {
        match self {
            ClassifyError::UndecodableImage(_) => "undecodable_image",
            ClassifyError::NonFiniteLogits(_) => "non_finite_logits",
            ClassifyError::ModelFileMissing(_) => "model_file_missing",
            ClassifyError::ModelIncompatible(_) => "model_incompatible",
            ClassifyError::InvalidManifest(_) => "invalid_manifest",
            ClassifyError::InvalidTensor(_) => "invalid_tensor",
            ClassifyError::InvalidThreshold(_) => "invalid_threshold",
            ClassifyError::BackendUnavailable(_) => "backend_unavailable",
            ClassifyError::Runtime(_) => "inference_failed",
            ClassifyError::Io { .. } => "io_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// ONNX file at `model_path`.
    InterchangeFile,
    /// [`ReferenceBackend`]; no file.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resample {
    #[default]
    Bilinear,
}

/// JSON document describing a model and its input contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub model_id: String,
    pub backend: Backend,
    /// Relative paths resolve against the manifest's directory on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_path: Option<PathBuf>,
    #[serde(default = "default_side")]
    pub input_side: u32,
    #[serde(default = "default_means")]
    pub channel_means: [f64; 3],
    #[serde(default = "default_stds")]
    pub channel_stds: [f64; 3],
    /// Label of logit 0 and logit 1.
    #[serde(default = "default_order")]
    pub class_order: [Label; 2],
    #[serde(default = "default_threshold")]
    pub default_threshold: f64,
    #[serde(default)]
    pub resample: Resample,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opset: Option<u32>,
}

fn default_side() -> u32 {
    DEFAULT_INPUT_SIDE
}
fn default_means() -> [f64; 3] {
    IMAGENET_MEANS
}
fn default_stds() -> [f64; 3] {
    IMAGENET_STDS
}
fn default_order() -> [Label; 2] {
    [Label::Safe, Label::Unsafe]
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

impl ModelManifest {
    /// Reference backend on raw `[0, 1]` pixels (means 0, stds 1).
    pub fn reference(model_id: impl Into<String>) -> Self {
        ModelManifest {
            model_id: model_id.into(),
            backend: Backend::Reference,
            model_path: None,
            input_side: DEFAULT_INPUT_SIDE,
            channel_means: [0.0; 3],
            channel_stds: [1.0; 3],
            class_order: default_order(),
            default_threshold: DEFAULT_THRESHOLD,
            resample: Resample::Bilinear,
            opset: None,
        }
    }

    /// ONNX model with ImageNet normalization.
    pub fn interchange(model_id: impl Into<String>, model_path: impl Into<PathBuf>) -> Self {
        ModelManifest {
            backend: Backend::InterchangeFile,
            model_path: Some(model_path.into()),
            channel_means: IMAGENET_MEANS,
            channel_stds: IMAGENET_STDS,
            ..ModelManifest::reference(model_id)
        }
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |m: String| Err(ClassifyError::InvalidManifest(m));
        if self.input_side == 0 {
            return bad("input_side must be positive".into());
        }
        if !self.channel_means.iter().all(|m| m.is_finite()) {
            return bad(format!("channel_means {:?}", self.channel_means));
        }
        if !self.channel_stds.iter().all(|s| s.is_finite() && *s > 0.0) {
            return bad(format!("channel_stds {:?} must be positive", self.channel_stds));
        }
        if self.class_order[0] == self.class_order[1] {
            return bad("class_order must name safe and unsafe once each".into());
        }
        if !(0.0..=1.0).contains(&self.default_threshold) {
            return bad(format!("default_threshold {}", self.default_threshold));
        }
        if self.backend == Backend::InterchangeFile && self.model_path.is_none() {
            return bad("interchange_file backend needs model_path".into());
        }
        Ok(())
    }

    pub fn unsafe_index(&self) -> usize {
        self.class_order.iter().position(|l| l.is_unsafe()).unwrap_or(1)
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let text = fs::read_to_string(path).map_err(|source| ClassifyError::Io { path: path.to_path_buf(), source })?;
        let mut manifest: ModelManifest =
            serde_json::from_str(&text).map_err(|e| ClassifyError::InvalidManifest(format!("{}: {e}", path.display())))?;
        if let (Some(model), Some(dir)) = (&manifest.model_path, path.parent()) {
            if model.is_relative() {
                manifest.model_path = Some(dir.join(model));
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifyError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| ClassifyError::InvalidManifest(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|source| ClassifyError::Io { path: path.to_path_buf(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub prob_unsafe: f64,
    pub logits: [f64; 2],
    pub threshold: f64,
    pub model_id: String,
}

/// A loaded model plus its manifest.
pub struct Classifier {
    manifest: ModelManifest,
    backend: Box<dyn InferenceBackend>,
    queue: Option<Mutex<()>>,
}

impl std::fmt::Debug for Classifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Classifier")
            .field("model_id", &self.manifest.model_id)
            .field("access", &self.backend.access())
            .finish()
    }
}

impl Classifier {
    pub fn new(manifest: ModelManifest, backend: Box<dyn InferenceBackend>) -> Self {
        let queue = (backend.access() == Access::Exclusive).then(|| Mutex::new(()));
        Classifier { manifest, backend, queue }
    }

    pub fn manifest(&self) -> &ModelManifest {
        &self.manifest
    }

    pub fn model_id(&self) -> &str {
        &self.manifest.model_id
    }

    pub fn default_threshold(&self) -> f64 {
        self.manifest.default_threshold
    }

    pub fn access(&self) -> Access {
        self.backend.access()
    }

    /// Runs the backend, queueing behind other callers for exclusive backends.
    pub fn infer(&self, tensor: &InputTensor) -> Result<[f64; 2], ClassifyError> {
        let _turn = self.queue.as_ref().map(|q| q.lock().unwrap_or_else(|p| p.into_inner()));
        self.backend.infer(tensor)
    }

    pub fn predict_tensor(&self, tensor: &InputTensor, threshold: f64) -> Result<Prediction, ClassifyError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(ClassifyError::InvalidThreshold(threshold));
        }
        let logits = self.infer(tensor)?;
        let prob_unsafe = softmax(logits)?[self.manifest.unsafe_index()];
        Ok(Prediction {
            label: Label::decide(prob_unsafe, threshold),
            prob_unsafe,
            logits,
            threshold,
            model_id: self.manifest.model_id.clone(),
        })
    }

    pub fn predict(&self, image: &Raster, threshold: f64) -> Result<Prediction, ClassifyError> {
        self.predict_tensor(&preprocess(image, &self.manifest)?, threshold)
    }

    pub fn predict_bytes(&self, bytes: &[u8], threshold: f64) -> Result<Prediction, ClassifyError> {
        self.predict_tensor(&preprocess_bytes(bytes, &self.manifest)?, threshold)
    }

    pub fn predict_file(&self, path: &Path, threshold: f64) -> Result<Prediction, ClassifyError> {
        let bytes = fs::read(path).map_err(|source| ClassifyError::Io { path: path.to_path_buf(), source })?;
        self.predict_bytes(&bytes, threshold)
    }
}

/// Validates the manifest and builds its backend.
pub fn load_model(manifest: &ModelManifest) -> Result<Classifier, ClassifyError> {
    manifest.validate()?;
    let backend: Box<dyn InferenceBackend> = match manifest.backend {
        Backend::Reference => Box::new(ReferenceBackend::new(manifest.class_order)),
        Backend::InterchangeFile => {
            let path = manifest.model_path.as_deref().unwrap_or(Path::new(""));
            if !path.is_file() {
                return Err(ClassifyError::ModelFileMissing(path.to_path_buf()));
            }
            load_interchange(path, manifest.input_side as usize)?
        }
    };
    Ok(Classifier::new(manifest.clone(), backend))
}

#[cfg(feature = "onnx")]
fn load_interchange(path: &Path, side: usize) -> Result<Box<dyn InferenceBackend>, ClassifyError> {
    Ok(Box::new(OnnxBackend::load(path, side)?))
}

#[cfg(not(feature = "onnx"))]
fn load_interchange(_path: &Path, _side: usize) -> Result<Box<dyn InferenceBackend>, ClassifyError> {
    Err(ClassifyError::BackendUnavailable("built without the `onnx` feature".into()))
}

pub fn load_model_file(manifest_path: &Path) -> Result<Classifier, ClassifyError> {
    load_model(&ModelManifest::load(manifest_path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredImage {
    pub path: PathBuf,
    pub sample: ScoredSample,
}

/// Scores in path order plus the files that failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchScores {
    pub scored: Vec<ScoredImage>,
    pub errors: Vec<UnreadableImage>,
}

impl BatchScores {
    pub fn samples(&self) -> Vec<ScoredSample> {
        self.scored.iter().map(|s| s.sample).collect()
    }
}

/// Scores every labeled image; per-file failures are collected, not fatal.
pub fn score_batch(classifier: &Classifier, inputs: &[ImageSample]) -> BatchScores {
    let mut inputs: Vec<&ImageSample> = inputs.iter().collect();
    inputs.sort_by(|a, b| a.path.cmp(&b.path));
    let threshold = classifier.default_threshold();
    let results: Vec<_> = inputs
        .par_iter()
        .map(|s| (s, classifier.predict_file(&s.path, threshold)))
        .collect();
    let mut out = BatchScores::default();
    for (s, r) in results {
        match r {
            Ok(p) => out.scored.push(ScoredImage {
                path: s.path.clone(),
                sample: ScoredSample { truth: s.label, prob_unsafe: p.prob_unsafe },
            }),
            Err(e) => out.errors.push(UnreadableImage { path: s.path.clone(), reason: e.to_string() }),
        }
    }
    out
}

/// [`score_batch`] over the labeled files under `root`.
pub fn score_directory(classifier: &Classifier, root: &Path, rule: &LabelingRule) -> Result<BatchScores, DatasetError> {
    Ok(score_batch(classifier, &dataset::list_labeled_files(root, rule)?))
}
