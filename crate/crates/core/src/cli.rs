//! The `microbe-screen` command line.
//!
//! Each subcommand wraps one library operation. Exit codes: 0 success, 1
//! domain error, 2 usage error. Failures print one JSON line
//! `{"error": code, "message": text}` to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::augment::{self, AugmentConfig, AugmentError, Raster};
use crate::classify::{self, ClassifyError, ModelManifest};
use crate::dataset::{self, DatasetError, LabelingRule, Split, SplitAugment, SplitRatios};
use crate::metrics::report::{
    interval_table, metric_lines, percent, threshold_cell, threshold_table, EvaluationReport, IntervalTableRow,
    ThresholdTableRow,
};
use crate::metrics::score_file::{self, ScoreFileError};
use crate::metrics::{self, Metric, MetricsError, ScoredSample};
use crate::seed::derive_seed;
use crate::service::{self, ServiceConfig, ServiceError};

pub const MODEL_ENV: &str = "DEEPSCOPE_MODEL";

#[derive(Debug, Parser)]
#[command(name = "microbe-screen", version, about = "Microscope image safety pipeline")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write tile-permuted copies of every image in a directory.
    Augment(AugmentArgs),
    /// Stratified train/validation/test split into a dataset manifest.
    Split(SplitArgs),
    /// Augment each split of a manifest separately.
    AugmentSplits(AugmentSplitsArgs),
    /// Expand a field image set by a fixed number of permutations per image.
    ExpandField(ExpandFieldArgs),
    /// Score labeled images into a `true_label,prob_unsafe` file.
    Score(ScoreArgs),
    /// Accuracy, precision, recall and F1 at a threshold.
    Eval(EvalArgs),
    /// Threshold with the best recall at a target precision.
    Calibrate(CalibrateArgs),
    /// Percentile bootstrap confidence intervals.
    Bootstrap(BootstrapArgs),
    /// Classify image files.
    Predict(PredictArgs),
    /// Run the HTTP prediction service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reject the identity arrangement.
    #[arg(long)]
    pub no_identity: bool,
    #[arg(long, default_value_t = 4)]
    pub min_swaps: u32,
    #[arg(long, default_value_t = 12)]
    pub max_swaps: u32,
}

#[derive(Debug, Args)]
pub struct LabeledInput {
    /// Root directory; labels come from `safe/` and `unsafe/` subfolders unless `--index` is given.
    #[arg(long)]
    pub input: PathBuf,
    /// CSV index with header `path,label,source_id,stained`, paths relative to `--input`.
    #[arg(long)]
    pub index: Option<PathBuf>,
}

impl LabeledInput {
    fn rule(&self) -> LabelingRule {
        match &self.index {
            Some(p) => LabelingRule::IndexFile(p.clone()),
            None => LabelingRule::ClassFolders,
        }
    }

    fn check(&self) -> Result<(), CliError> {
        require_dir(&self.input)?;
        if let Some(index) = &self.index {
            if !index.is_file() {
                return Err(CliError::Usage(format!("index file {} does not exist", index.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub labeled: LabeledInput,
    /// Manifest to write.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.7, 0.2, 0.1])]
    pub ratios: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct AugmentSplitsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Updated manifest; defaults to overwriting `--manifest`.
    #[arg(long)]
    pub output_manifest: Option<PathBuf>,
    /// Write images below this directory; without it only the manifest is produced.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Permutations per original, applied to every split without a total.
    #[arg(long, default_value_t = 0)]
    pub per_image: usize,
    #[arg(long)]
    pub train_total: Option<usize>,
    #[arg(long)]
    pub validation_total: Option<usize>,
    #[arg(long)]
    pub test_total: Option<usize>,
    #[arg(long)]
    pub no_identity: bool,
}

#[derive(Debug, Args)]
pub struct ExpandFieldArgs {
    #[command(flatten)]
    pub labeled: LabeledInput,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 625)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model manifest (JSON).
    #[arg(long, env = MODEL_ENV)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub labeled: LabeledInput,
    /// Score file to write.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Score file with header `true_label,prob_unsafe`.
    #[arg(long)]
    pub scores: PathBuf,
    /// Name shown in the table's Model column.
    #[arg(long, default_value = "model")]
    pub model_name: String,
    /// Also write a JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: ReportArgs,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: ReportArgs,
    #[arg(long, default_value_t = 0.9)]
    pub target_precision: f64,
    /// Threshold for the "before calibration" columns.
    #[arg(long, default_value_t = 0.5)]
    pub default_threshold: f64,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub common: ReportArgs,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// One metric, or all four when omitted.
    #[arg(long)]
    pub metric: Option<Metric>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Defaults to the manifest's threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = service::DEFAULT_PORT)]
    pub port: u16,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value_t = service::DEFAULT_MAX_UPLOAD_BYTES)]
    pub max_upload_bytes: usize,
    #[arg(long, default_value_t = service::DEFAULT_REQUEST_TIMEOUT.as_secs())]
    pub request_timeout: u64,
    /// Directory of static assets (the web UI).
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Accept `/admin/reload` from non-loopback peers.
    #[arg(long)]
    pub allow_remote_admin: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub report_path: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{message}")]
    Domain { code: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain { .. } => 1,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Domain { code, .. } => code,
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain { code: e.code(), message: e.to_string() }
            }
        }
    )*};
}
domain_from!(AugmentError, DatasetError, MetricsError, ScoreFileError, ClassifyError, ServiceError);

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Domain { code: "io_error", message: format!("{}: {e}", path.display()) }
}

fn require_dir(path: &Path) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{} is not a directory", path.display())))
    }
}

fn require_probability(name: &str, value: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} {value} is outside [0, 1]")))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Domain { code: "io_error", message: e.to_string() })?;
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

/// JSON line written to stderr on failure.
pub fn error_line(code: &str, message: &str) -> String {
    serde_json::json!({ "error": code, "message": message }).to_string()
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand)
            {
                let _ = write!(out, "{e}");
                let code = if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
                return CommandOutcome { exit_code: code, report_path: None };
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let _ = writeln!(err, "{}", error_line("usage", first));
            return CommandOutcome { exit_code: 2, report_path: None };
        }
    };
    match execute(cli, out, err) {
        Ok(report_path) => CommandOutcome { exit_code: 0, report_path },
        Err(e) => {
            let _ = writeln!(err, "{}", error_line(e.code(), &e.to_string()));
            CommandOutcome { exit_code: e.exit_code(), report_path: None }
        }
    }
}

pub fn execute(cli: Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    if cli.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    if let Command::Serve(args) = cli.command {
        return cmd_serve(args, cli.jobs).map(|_| None);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Augment(a) => cmd_augment(a, out),
        Command::Split(a) => cmd_split(a, out, err),
        Command::AugmentSplits(a) => cmd_augment_splits(a, out),
        Command::ExpandField(a) => cmd_expand_field(a, out),
        Command::Score(a) => cmd_score(a, out, err),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Calibrate(a) => cmd_calibrate(a, out),
        Command::Bootstrap(a) => cmd_bootstrap(a, out),
        Command::Predict(a) => cmd_predict(a, out, err),
        Command::Serve(_) => unreachable!("handled above"),
    })
}

fn cmd_augment(a: AugmentArgs, out: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    require_dir(&a.input)?;
    let base = AugmentConfig {
        count_per_image: a.count,
        seed: a.seed,
        min_swaps: a.min_swaps,
        max_swaps: a.max_swaps,
        allow_identity: !a.no_identity,
        ..AugmentConfig::default()
    };
    base.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let mut files: Vec<PathBuf> = fs::read_dir(&a.input)
        .map_err(|e| io_error(&a.input, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && dataset::has_image_extension(p))
        .collect();
    files.sort();
    let stems = dataset::unique_stems(files.iter().map(|p| p.as_path()));

    let written: Vec<usize> = files
        .par_iter()
        .map(|path| {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let seed = derive_seed(a.seed, &format!("augment/{name}"));
            let image = image::open(path)
                .map_err(|source| AugmentError::Image { path: path.clone(), source })?;
            let config = AugmentConfig { seed, ..base.clone() };
            let augs = augment::generate_augmentations(&Raster::from_dynamic(&image), &config)?;
            if augs.is_empty() {
                return Ok(0);
            }
            augment::write_augmentations(&a.output, &stems[path.as_path()], &augs, seed).map(|r| r.len())
        })
        .collect::<Result<_, AugmentError>>()?;
    let total: usize = written.iter().sum();
    writeln!(out, "{} inputs, {total} outputs", files.len()).map_err(|e| io_error(&a.output, e))?;
    Ok(Some(a.output))
}

fn cmd_split(a: SplitArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    a.labeled.check()?;
    let ratios = SplitRatios::new(a.ratios[0], a.ratios[1], a.ratios[2]).map_err(|e| CliError::Usage(e.to_string()))?;
    let report = dataset::ingest(&a.labeled.input, &a.labeled.rule())?;
    for u in &report.unreadable {
        let _ = writeln!(err, "{}", error_line("unreadable_image", &format!("{}: {}", u.path.display(), u.reason)));
    }
    let manifest = dataset::split(&report.samples, ratios, a.seed)?;
    manifest.save(&a.manifest)?;
    let counts = manifest.split_counts();
    let line = Split::ALL.iter().map(|s| format!("{s} {}", counts.get(s).unwrap_or(&0))).collect::<Vec<_>>().join(", ");
    writeln!(out, "{line}").map_err(|e| io_error(&a.manifest, e))?;
    Ok(Some(a.manifest))
}

fn cmd_augment_splits(a: AugmentSplitsArgs, out: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    if !a.manifest.is_file() {
        return Err(CliError::Usage(format!("manifest {} does not exist", a.manifest.display())));
    }
    let manifest = dataset::DatasetManifest::load(&a.manifest)?;
    let totals = [(Split::Train, a.train_total), (Split::Validation, a.validation_total), (Split::Test, a.test_total)];
    let plans: BTreeMap<Split, SplitAugment> = totals
        .into_iter()
        .map(|(split, total)| {
            let mut plan = match total {
                Some(t) => SplitAugment::total(t),
                None => SplitAugment::per_image(a.per_image),
            };
            plan.allow_identity = !a.no_identity;
            (split, plan)
        })
        .collect();
    let updated = dataset::augment_splits(&manifest, &plans, a.out_dir.as_deref())?;
    let path = a.output_manifest.unwrap_or(a.manifest);
    updated.save(&path)?;
    let counts = updated.augmented_counts();
    let line = Split::ALL.iter().map(|s| format!("{s} {}", counts.get(s).unwrap_or(&0))).collect::<Vec<_>>().join(", ");
    writeln!(out, "augmented: {line}").map_err(|e| io_error(&path, e))?;
    Ok(Some(path))
}

fn cmd_expand_field(a: ExpandFieldArgs, out: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    a.labeled.check()?;
    let samples = dataset::list_labeled_files(&a.labeled.input, &a.labeled.rule())?;
    let manifest = dataset::expand_field_set(&samples, a.count, a.seed, a.out_dir.as_deref())?;
    manifest.save(&a.manifest)?;
    writeln!(out, "{} originals, {} augmented", manifest.entries.len(), manifest.total_augmented())
        .map_err(|e| io_error(&a.manifest, e))?;
    Ok(Some(a.manifest))
}

fn cmd_score(a: ScoreArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    a.labeled.check()?;
    let classifier = classify::load_model_file(&a.model.model)?;
    let batch = classify::score_directory(&classifier, &a.labeled.input, &a.labeled.rule())?;
    for e in &batch.errors {
        let _ = writeln!(err, "{}", error_line("unreadable_image", &format!("{}: {}", e.path.display(), e.reason)));
    }
    score_file::save_scores(&a.output, &batch.samples())?;
    writeln!(out, "{} scored, {} failed", batch.scored.len(), batch.errors.len()).map_err(|e| io_error(&a.output, e))?;
    Ok(Some(a.output))
}

fn load_scores(path: &Path) -> Result<Vec<ScoredSample>, CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("score file {} does not exist", path.display())));
    }
    Ok(score_file::read_scores(path)?)
}

fn emit(out: &mut (dyn Write + Send), text: &str, report: Option<(&Path, &EvaluationReport)>) -> Result<Option<PathBuf>, CliError> {
    out.write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e))?;
    match report {
        Some((path, doc)) => {
            write_json(path, doc)?;
            Ok(Some(path.to_path_buf()))
        }
        None => Ok(None),
    }
}

fn cmd_eval(a: EvalArgs, out: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    require_probability("threshold", a.threshold)?;
    let samples = load_scores(&a.common.scores)?;
    let (counts, summary) = metrics::evaluate(&samples, a.threshold)?;
    let text = metric_lines(&summary);
    let doc = EvaluationReport {
        model: a.common.model_name.clone(),
        threshold: a.threshold,
        counts,
        metrics: summary,
        calibration: None,
        intervals: Vec::new(),
        replicates: None,
        alpha: None,
        seed: None,
        metric_table: text.clone(),
    };
    emit(out, &text, a.common.report.as_deref().map(|p| (p, &doc)))
}

fn cmd_calibrate(a: CalibrateArgs, out: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    require_probability("default-threshold", a.default_threshold)?;
    if !(a.target_precision > 0.0 && a.target_precision <= 1.0) {
        return Err(CliError::Usage(format!("--target-precision {} is outside (0, 1]", a.target_precision)));
    }
    let samples = load_scores(&a.common.scores)?;
    let calibration = metrics::calibrate_threshold(&samples, a.target_precision)?;
    let (counts, default) = metrics::evaluate(&samples, a.default_threshold)?;
    let row = ThresholdTableRow::new(a.common.model_name.clone(), default, &calibration);
    let table = threshold_table(&[row]);
    let text = format!(
        "Threshold {}\nPrecision {}\nRecall {}\nAccuracy {}\nF1 {}\n\n{table}",
        threshold_cell(calibration.threshold),
        percent(calibration.precision),
        percent(calibration.recall),
        percent(calibration.accuracy),
        percent(calibration.f1),
    );
    let doc = EvaluationReport {
        model: a.common.model_name.clone(),
        threshold: a.default_threshold,
        counts,
        metrics: default,
        calibration: Some(calibration),
        intervals: Vec::new(),
        replicates: None,
        alpha: None,
        seed: None,
        metric_table: table,
    };
    emit(out, &text, a.common.report.as_deref().map(|p| (p, &doc)))
}

fn cmd_bootstrap(a: BootstrapArgs, out: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    require_probability("threshold", a.threshold)?;
    if a.replicates < 2 {
        return Err(CliError::Usage(format!("--B {} must be at least 2", a.replicates)));
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha {} is outside (0, 1)", a.alpha)));
    }
    let samples = load_scores(&a.common.scores)?;
    let (counts, summary) = metrics::evaluate(&samples, a.threshold)?;
    let selected: Vec<Metric> = match a.metric {
        Some(m) => vec![m],
        None => Metric::ALL.to_vec(),
    };
    let intervals = selected
        .iter()
        .map(|&m| metrics::bootstrap(&samples, a.threshold, m, a.replicates, a.alpha, a.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let table = match a.metric {
        None => interval_table(&[IntervalTableRow::from_reports(a.common.model_name.clone(), &intervals)]),
        Some(_) => intervals
            .iter()
            .map(|r| format!("{} {}\n", r.metric_name, crate::metrics::report::ci_cell(r.ci_low, r.ci_high, r.sd)))
            .collect(),
    };
    let doc = EvaluationReport {
        model: a.common.model_name.clone(),
        threshold: a.threshold,
        counts,
        metrics: summary,
        calibration: None,
        intervals,
        replicates: Some(a.replicates),
        alpha: Some(a.alpha),
        seed: Some(a.seed),
        metric_table: table.clone(),
    };
    emit(out, &table, a.common.report.as_deref().map(|p| (p, &doc)))
}

fn cmd_predict(a: PredictArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<Option<PathBuf>, CliError> {
    if let Some(t) = a.threshold {
        require_probability("threshold", t)?;
    }
    let classifier = classify::load_model_file(&a.model.model)?;
    let threshold = a.threshold.unwrap_or(classifier.default_threshold());
    let mut failed = None;
    for path in &a.images {
        match classifier.predict_file(path, threshold) {
            Ok(p) => {
                let line = serde_json::json!({
                    "path": path,
                    "label": p.label,
                    "probability_unsafe": p.prob_unsafe,
                    "threshold": p.threshold,
                    "model_id": p.model_id,
                });
                writeln!(out, "{line}").map_err(|e| io_error(path, e))?;
            }
            Err(e) => {
                let _ = writeln!(err, "{}", error_line(e.code(), &format!("{}: {e}", path.display())));
                failed = Some(e);
            }
        }
    }
    match failed {
        Some(e) => Err(e.into()),
        None => Ok(None),
    }
}

fn cmd_serve(a: ServeArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let config = ServiceConfig {
        bind_address: SocketAddr::new(a.host, a.port),
        model_manifest_path: a.model.model,
        threshold: a.threshold,
        max_upload_bytes: a.max_upload_bytes,
        request_timeout: Duration::from_secs(a.request_timeout),
        static_dir: a.static_dir,
        allow_remote_admin: a.allow_remote_admin,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if a.port == 0 {
        return Err(CliError::Usage("--port must be in [1, 65535]".into()));
    }
    if !config.model_manifest_path.is_file() {
        return Err(CliError::Usage(format!("model manifest {} does not exist", config.model_manifest_path.display())));
    }
    ModelManifest::load(&config.model_manifest_path)?;
    let mut runtime = tokio::runtime::Builder::new_multi_thread();
    if let Some(n) = jobs {
        runtime.worker_threads(n);
    }
    let runtime = runtime.enable_all().build().map_err(|e| io_error(Path::new("<runtime>"), e))?;
    runtime.block_on(service::serve(config))?;
    Ok(())
}
