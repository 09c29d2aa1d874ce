//! Score files: comma-separated text with header `true_label,prob_unsafe`.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::ScoredSample;
use crate::Label;

pub const HEADER: &str = "true_label,prob_unsafe";

#[derive(Debug, thiserror::Error)]
pub enum ScoreFileError {
    #[error("i/o error for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("score file line {line}: {message}")]
    Format { line: usize, message: String },
}

impl ScoreFileError {
    pub fn code(&self) -> &'static str {
        match self {
            ScoreFileError::Io { .. } => "io_error",
            ScoreFileError::Format { .. } => "invalid_score_file",
        }
    }
}

pub fn parse_scores<R: Read>(reader: R) -> Result<Vec<ScoredSample>, ScoreFileError> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut rows = csv.records();
    let header = rows
        .next()
        .ok_or_else(|| ScoreFileError::Format { line: 1, message: "missing header".into() })?
        .map_err(|e| ScoreFileError::Format { line: 1, message: e.to_string() })?;
    if header.iter().collect::<Vec<_>>() != ["true_label", "prob_unsafe"] {
        return Err(ScoreFileError::Format { line: 1, message: format!("expected header {HEADER:?}") });
    }
    let mut out = Vec::new();
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        let fail = |message: String| ScoreFileError::Format { line, message };
        let row = row.map_err(|e| fail(e.to_string()))?;
        if row.len() != 2 {
            return Err(fail(format!("expected 2 fields, found {}", row.len())));
        }
        let truth: Label = row[0].parse().map_err(|e: crate::ParseLabelError| fail(e.to_string()))?;
        let prob: f64 = row[1].parse().map_err(|_| fail(format!("{:?} is not a decimal", &row[1])))?;
        out.push(ScoredSample::new(truth, prob).map_err(|e| fail(e.to_string()))?);
    }
    Ok(out)
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoredSample>, ScoreFileError> {
    let file = File::open(path).map_err(|source| ScoreFileError::Io { path: path.to_path_buf(), source })?;
    parse_scores(file)
}

/// Writes the header and one row per sample. Probabilities use the shortest
/// decimal that round-trips.
pub fn write_scores<W: Write>(mut writer: W, samples: &[ScoredSample]) -> io::Result<()> {
    writeln!(writer, "{HEADER}")?;
    for s in samples {
        writeln!(writer, "{},{}", s.truth, s.prob_unsafe)?;
    }
    writer.flush()
}

pub fn save_scores(path: &Path, samples: &[ScoredSample]) -> Result<(), ScoreFileError> {
    let io_err = |source| ScoreFileError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    write_scores(BufWriter::new(file), samples).map_err(io_err)
}
