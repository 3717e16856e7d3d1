//! Experiment runner: CSV ingestion, tau sweeps and machine-readable reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detectors::{run_detector, DetectorConfig, Method, Mode};
use crate::error::{Error, Result};
use crate::metrics::{roc_auroc, Confusion, RocPoint};
use crate::preprocess::{apply_scaler, fit_scaler, sample_experiment};
use crate::svd::TruncationPolicy;
use crate::tensor::{DataMatrix, FactorShape};

/// Points in the default tau grid, evenly spaced over `[0, DEFAULT_TAU_MAX]`.
pub const DEFAULT_TAU_POINTS: usize = 50;
pub const DEFAULT_TAU_MAX: f64 = 0.5;

/// `points` evenly spaced values from 0 to `max`, both ends included.
pub fn tau_grid(points: usize, max: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| max * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

pub fn default_tau_grid() -> Vec<f64> {
    tau_grid(DEFAULT_TAU_POINTS, DEFAULT_TAU_MAX)
}

/// Loads a rectangular numeric CSV. `label_column` is a header name or a
/// 0-based column index; that column is parsed as integers and removed from
/// the feature matrix.
pub fn load_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    label_column: Option<&str>,
) -> Result<(DataMatrix, Option<Vec<i64>>)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let parse_err = |line: u64, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };

    let label_idx = match label_column {
        None => None,
        Some(name) => {
            let by_name = if has_header {
                reader
                    .headers()
                    .map_err(|e| parse_err(1, 0, e.to_string()))?
                    .iter()
                    .position(|h| h == name)
            } else {
                None
            };
            match by_name.or_else(|| name.parse::<usize>().ok()) {
                Some(i) => Some(i),
                None => {
                    return Err(Error::Config(format!(
                        "label column {name:?} not found in {}",
                        path.display()
                    )))
                }
            }
        }
    };

    let mut width = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, 0, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(
                    line,
                    record.len().min(w) + 1,
                    format!("expected {w} fields, found {}", record.len()),
                ))
            }
            _ => {}
        }
        if let Some(li) = label_idx {
            if li >= record.len() {
                return Err(Error::Config(format!(
                    "label column {li} out of range for {} columns",
                    record.len()
                )));
            }
        }
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_idx {
                labels.push(parse_label(field).ok_or_else(|| {
                    parse_err(line, col + 1, format!("label {field:?} is not an integer"))
                })?);
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, col + 1, format!("{field:?} is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, col + 1, format!("{field:?} is not finite")));
            }
            values.push(v);
        }
        rows += 1;
    }

    let width = width.ok_or_else(|| parse_err(1, 0, "file contains no data rows".into()))?;
    let cols = width - usize::from(label_idx.is_some());
    if cols == 0 {
        return Err(parse_err(1, 0, "no feature columns".into()));
    }
    let matrix = DataMatrix::new(rows, cols, values)?;
    Ok((matrix, label_idx.map(|_| labels)))
}

fn parse_label(field: &str) -> Option<i64> {
    field.parse::<i64>().ok().or_else(|| {
        let f: f64 = field.parse().ok()?;
        (f.fract() == 0.0 && f.abs() < 9.0e15).then_some(f as i64)
    })
}

/// One integer label per non-empty line; a non-numeric first line is taken
/// as a header.
pub fn load_labels_file(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        match parse_label(field) {
            Some(l) => labels.push(l),
            None if i == 0 => {}
            None => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i as u64 + 1,
                    column: 1,
                    message: format!("label {field:?} is not an integer"),
                })
            }
        }
    }
    Ok(labels)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// A single JSON document.
    #[default]
    Structured,
    /// CSV, one row per tau, metadata in `#` comment lines.
    Tabular,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structured" | "json" => Ok(Self::Structured),
            "tabular" | "csv" => Ok(Self::Tabular),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

/// Which rows the standard scaler is fitted on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalerFit {
    /// The exact matrix handed to the compressor (training rows stacked
    /// above the evaluated rows).
    #[default]
    Input,
    /// Every row of `--input`, before sampling; training rows from a file
    /// are transformed with the same parameters.
    Dataset,
}

impl FromStr for ScalerFit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "input" => Ok(Self::Input),
            "dataset" => Ok(Self::Dataset),
            other => Err(Error::Config(format!("unknown scaler fit {other:?}"))),
        }
    }
}

/// Everything needed to rerun one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub input: PathBuf,
    #[serde(default = "yes")]
    pub has_header: bool,
    /// Label column (name or 0-based index) of `input`, or a path to a
    /// labels file with one integer per line.
    pub labels: Option<String>,
    pub train: Option<PathBuf>,
    pub method: Method,
    pub shape: FactorShape,
    pub taus: Vec<f64>,
    pub scaler: bool,
    #[serde(default)]
    pub scaler_fit: ScalerFit,
    /// Defaults to supervised when training data is present.
    pub mode: Option<Mode>,
    pub normal_class: Option<i64>,
    pub n_normal: Option<usize>,
    pub n_anomalous: Option<usize>,
    pub seed: u64,
    pub emit_scores: bool,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
}

fn yes() -> bool {
    true
}

impl ExperimentSpec {
    pub fn new(input: impl Into<PathBuf>, method: Method, shape: FactorShape) -> Self {
        Self {
            input: input.into(),
            has_header: true,
            labels: None,
            train: None,
            method,
            shape,
            taus: default_tau_grid(),
            scaler: false,
            scaler_fit: ScalerFit::Input,
            mode: None,
            normal_class: None,
            n_normal: None,
            n_anomalous: None,
            seed: 0,
            emit_scores: false,
            out: None,
            format: ReportFormat::Structured,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() {
            return Err(Error::Config("tau list is empty".into()));
        }
        for &t in &self.taus {
            TruncationPolicy::uniform(t)?;
        }
        if self.n_normal.is_some() != self.n_anomalous.is_some() {
            return Err(Error::Config(
                "sampling needs both a normal and an anomalous count".into(),
            ));
        }
        if self.n_normal.is_some() && (self.labels.is_none() || self.normal_class.is_none()) {
            return Err(Error::Config(
                "sampling needs labels and a normal class".into(),
            ));
        }
        if self.normal_class.is_some() && self.labels.is_none() {
            return Err(Error::Config("a normal class needs labels".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub rows: usize,
    pub cols: usize,
    /// SHA-256 of the input file, hex.
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub spec: ExperimentSpec,
    pub dataset: DatasetFingerprint,
    pub library_version: String,
    pub evaluated_rows: usize,
    /// Where the local basis came from: `file` or `row:<index in input>`.
    pub training_source: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub auroc: f64,
    pub threshold: f64,
    pub accuracy: f64,
    pub confusion: Confusion,
    /// All decision values tied: the detector labels everything the same.
    pub degenerate: bool,
    pub roc: Vec<RocPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauRecord {
    pub tau: f64,
    pub evaluation: Option<Evaluation>,
    pub flagged_rows: Vec<usize>,
    pub scores: Option<Vec<f64>>,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub metadata: ReportMetadata,
    pub records: Vec<TauRecord>,
}

impl SweepReport {
    /// Record with the highest AUROC; earliest wins ties.
    pub fn best(&self) -> Option<&TauRecord> {
        self.records
            .iter()
            .filter(|r| r.evaluation.is_some())
            .fold(None, |best: Option<&TauRecord>, r| match best {
                Some(b) if auroc_of(b) >= auroc_of(r) => Some(b),
                _ => Some(r),
            })
    }

    pub fn aurocs(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.evaluation.as_ref().map(|e| e.auroc)).collect()
    }
}

fn auroc_of(r: &TauRecord) -> f64 {
    r.evaluation.as_ref().map_or(f64::NEG_INFINITY, |e| e.auroc)
}

/// Rows to score, their ground truth (if known) and the optional training
/// block, prepared once per experiment.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub test: DataMatrix,
    pub is_anomaly: Option<Vec<bool>>,
    pub train: Option<DataMatrix>,
    pub training_source: Option<String>,
    pub fingerprint: DatasetFingerprint,
}

pub fn prepare_data(spec: &ExperimentSpec) -> Result<PreparedData> {
    spec.validate()?;
    let label_path = spec.labels.as_deref().map(Path::new).filter(|p| p.is_file());
    let label_column = if label_path.is_some() {
        None
    } else {
        spec.labels.as_deref()
    };
    let (raw, column_labels) = load_csv(&spec.input, spec.has_header, label_column)?;
    let dataset_scaler = (spec.scaler && spec.scaler_fit == ScalerFit::Dataset).then(|| fit_scaler(&raw));
    let data = match &dataset_scaler {
        Some(p) => apply_scaler(&raw, p)?,
        None => raw,
    };
    let labels = match label_path {
        Some(p) => Some(load_labels_file(p)?),
        None => column_labels,
    };
    if let Some(l) = &labels {
        if l.len() != data.rows() {
            return Err(Error::Dimension(format!(
                "{} labels for {} data rows",
                l.len(),
                data.rows()
            )));
        }
    }
    if spec.shape.product() < data.cols() {
        return Err(Error::Config(format!(
            "shape {} has product {} but the data has {} features",
            spec.shape,
            spec.shape.product(),
            data.cols()
        )));
    }

    let bytes = fs::read(&spec.input).map_err(|e| Error::io(&spec.input, e))?;
    let fingerprint = DatasetFingerprint {
        rows: data.rows(),
        cols: data.cols(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };

    let (test, is_anomaly, used_rows) = match (&labels, spec.normal_class, spec.n_normal, spec.n_anomalous) {
        (Some(l), Some(normal), Some(nn), Some(na)) => {
            let sample = sample_experiment(&data, l, normal, nn, na, spec.seed)?;
            (sample.data, Some(sample.is_anomaly), sample.source_rows)
        }
        (Some(l), Some(normal), _, _) => {
            let truth = l.iter().map(|&x| x != normal).collect();
            (data.clone(), Some(truth), (0..data.rows()).collect())
        }
        _ => (data.clone(), None, (0..data.rows()).collect()),
    };

    let (train, training_source) = match &spec.train {
        Some(path) => {
            let column = label_column.filter(|c| c.parse::<usize>().is_err());
            let (train, _) = match load_csv(path, spec.has_header, column) {
                Err(Error::Config(_)) if column.is_some() => load_csv(path, spec.has_header, None)?,
                other => other?,
            };
            if train.cols() != data.cols() {
                return Err(Error::Dimension(format!(
                    "training file has {} features, input has {}",
                    train.cols(),
                    data.cols()
                )));
            }
            let train = match &dataset_scaler {
                Some(p) => apply_scaler(&train, p)?,
                None => train,
            };
            (Some(train), Some("file".to_string()))
        }
        None if spec.method.is_local() => {
            let (Some(l), Some(normal)) = (&labels, spec.normal_class) else {
                return Err(Error::Config(format!(
                    "method {} needs --train or labels with a normal class",
                    spec.method
                )));
            };
            let row = pick_training_row(l, normal, &used_rows, spec.seed)?;
            (
                Some(data.select_rows(&[row])?),
                Some(format!("row:{row}")),
            )
        }
        None => (None, None),
    };

    Ok(PreparedData {
        test,
        is_anomaly,
        train,
        training_source,
        fingerprint,
    })
}

/// A normal row outside the evaluated set when one exists, otherwise any
/// normal row; chosen with a seeded stream separate from sampling.
fn pick_training_row(labels: &[i64], normal: i64, used: &[usize], seed: u64) -> Result<usize> {
    let mut used_mask = vec![false; labels.len()];
    for &u in used {
        used_mask[u] = true;
    }
    let normal_rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == normal).collect();
    let unused: Vec<usize> = normal_rows.iter().copied().filter(|&i| !used_mask[i]).collect();
    let pool = if unused.is_empty() { &normal_rows } else { &unused };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    pool.choose(&mut rng)
        .copied()
        .ok_or(Error::Sampling {
            kind: "normal training",
            requested: 1,
            available: 0,
        })
}

fn detector_config(spec: &ExperimentSpec, tau: f64, has_train: bool) -> Result<DetectorConfig> {
    let mode = spec.mode.unwrap_or(if has_train || spec.method.is_local() {
        Mode::Supervised
    } else {
        Mode::Unsupervised
    });
    Ok(DetectorConfig::new(spec.method, spec.shape.clone(), TruncationPolicy::uniform(tau)?)
        .with_scaler(spec.scaler && spec.scaler_fit == ScalerFit::Input)
        .with_mode(mode))
}

/// Scores and evaluates one tau on prepared data.
pub fn run_tau(spec: &ExperimentSpec, data: &PreparedData, tau: f64) -> Result<TauRecord> {
    let start = Instant::now();
    let wrap = |e: Error| Error::AtTau {
        tau,
        source: Box::new(e),
    };
    let cfg = detector_config(spec, tau, data.train.is_some()).map_err(wrap)?;
    let train = if spec.method.is_local() || cfg.mode != Mode::Unsupervised {
        data.train.as_ref()
    } else {
        None
    };
    let scores = run_detector(&cfg, &data.test, train).map_err(wrap)?;
    let evaluation = match &data.is_anomaly {
        Some(truth) => {
            let roc = roc_auroc(&scores.scores, truth).map_err(wrap)?;
            Some(Evaluation {
                auroc: roc.auroc,
                threshold: roc.threshold,
                accuracy: roc.accuracy,
                confusion: roc.confusion,
                degenerate: roc.degenerate,
                roc: roc.points,
            })
        }
        None => None,
    };
    let emit = spec.emit_scores || evaluation.is_none();
    Ok(TauRecord {
        tau,
        evaluation,
        flagged_rows: scores.flagged,
        scores: emit.then_some(scores.scores),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs the full sweep. Taus are evaluated concurrently; records come back
/// in the requested order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepReport> {
    let data = prepare_data(spec)?;
    let records = spec
        .taus
        .par_iter()
        .map(|&tau| run_tau(spec, &data, tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        metadata: ReportMetadata {
            spec: spec.clone(),
            dataset: data.fingerprint,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            evaluated_rows: data.test.rows(),
            training_source: data.training_source,
        },
        records,
    })
}

pub const TABULAR_HEADER: [&str; 8] = ["tau", "auroc", "threshold", "accuracy", "tn", "fp", "fn", "tp"];

pub fn render_report(report: &SweepReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Structured => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Tabular => {
            let mut out = format!("# metadata: {}\n", serde_json::to_string(&report.metadata)?);
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Format(e.to_string());
            w.write_record(TABULAR_HEADER).map_err(csv_err)?;
            for r in &report.records {
                let fields = match &r.evaluation {
                    Some(e) => vec![
                        r.tau.to_string(),
                        e.auroc.to_string(),
                        e.threshold.to_string(),
                        e.accuracy.to_string(),
                        e.confusion.tn.to_string(),
                        e.confusion.fp.to_string(),
                        e.confusion.fn_.to_string(),
                        e.confusion.tp.to_string(),
                    ],
                    None => {
                        let mut v = vec![r.tau.to_string()];
                        v.resize(TABULAR_HEADER.len(), String::new());
                        v
                    }
                };
                w.write_record(&fields).map_err(csv_err)?;
            }
            let body = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
            out.push_str(&String::from_utf8(body).map_err(|e| Error::Format(e.to_string()))?);
            Ok(out)
        }
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &SweepReport, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let text = render_report(report, format)?;
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn read_structured_report(path: impl AsRef<Path>) -> Result<SweepReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = default_tau_grid();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[49], 0.5);
        assert_eq!(tau_grid(1, 0.5), vec![0.0]);
    }

    #[test]
    fn label_parsing() {
        assert_eq!(parse_label("3"), Some(3));
        assert_eq!(parse_label("4.0"), Some(4));
        assert_eq!(parse_label("4.5"), None);
        assert_eq!(parse_label("x"), None);
    }

    #[test]
    fn spec_validation() {
        let shape = FactorShape::new(vec![2, 2]).unwrap();
        let mut spec = ExperimentSpec::new("x.csv", Method::Acg, shape);
        assert!(spec.validate().is_ok());
        spec.taus.clear();
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
        spec.taus = vec![0.1, 1.2];
        assert!(spec.validate().is_err());
        spec.taus = vec![0.1];
        spec.n_normal = Some(3);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn training_row_avoids_used_rows() {
        let labels = [0, 1, 0, 0, 1];
        for seed in 0..10 {
            assert_eq!(pick_training_row(&labels, 0, &[0, 2], seed).unwrap(), 3);
        }
        assert!(pick_training_row(&labels, 7, &[], 0).is_err());
    }
}
