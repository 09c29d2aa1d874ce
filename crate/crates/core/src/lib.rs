//! Pipeline toolkit for microscope images of water samples.
//!
//! The crate covers the software side of a presence/absence water test that
//! classifies a microscope photo as `safe` or `unsafe`:
//!
//! - [`augment`]: label-preserving augmentation by permuting a 4×4 grid of tiles.
//! - [`dataset`]: ingestion, stratified split-then-augment, field-set expansion
//!   and the JSON manifest that makes every run reproducible from seeds.
//! - [`metrics`]: confusion counts, precision/recall sweeps, target-precision
//!   threshold calibration and percentile bootstrap confidence intervals.
//! - [`classify`]: 224×224 preprocessing, softmax, pluggable two-class backends
//!   (ONNX or a deterministic reference rule) and threshold decisions.
//! - [`service`]: an HTTP prediction service (`POST /predict`, `GET /health`,
//!   `POST /admin/reload`).
//! - [`cli`]: the `microbe-screen` command line, a thin shell over the modules above.

pub mod augment;
pub mod classify;
pub mod cli;
pub mod dataset;
pub mod metrics;
pub mod seed;
pub mod service;

mod label;

pub use label::{Label, ParseLabelError};
