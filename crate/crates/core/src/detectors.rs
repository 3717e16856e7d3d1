//! Compression-based anomaly detectors.
//!
//! Every detector maps data points to a decision value `d`, a normality
//! score: rows whose structure survives TT compression stay close to their
//! original direction and score near 1, rows whose structure is discarded
//! score lower.
//!
//! * **Global** detectors compress the whole (optionally training-augmented)
//!   dataset at once, with the data-row index as the first TT core.
//! * **Local** detectors fit the first `n - 1` left-isometric cores on a
//!   single normal vector and force every other vector through that basis.
//!
//! Each family comes in an *auto* flavour (compare a row with its own
//! compression) and a *group* flavour (sum of cosines between a row and every
//! compressed row of a set).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{apply_scaler, fit_scaler};
use crate::svd::{truncated_svd, TruncationPolicy};
use crate::tensor::{dot, matrix_as_tensor, norm, pad_features, pad_vector, vector_as_tensor};
use crate::tensor::{DataMatrix, FactorShape};
use crate::tt::{check_links, contract_to_matrix, tt_contract, tt_decompose, to_row_major};
use crate::tt::{Core, TTChain};

/// Compressed rows with norm at or below this fraction of the largest
/// compressed-row norm are treated as zero by the group detectors.
pub const ZERO_ROW_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Auto-comparative global compression.
    Acg,
    /// Group-comparative global compression.
    Gcg,
    /// Auto-comparative local compression.
    Acl,
    /// Group-comparative local compression.
    Gcl,
}

impl Method {
    pub fn is_local(self) -> bool {
        matches!(self, Method::Acl | Method::Gcl)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Acg => "acg",
            Method::Gcg => "gcg",
            Method::Acl => "acl",
            Method::Gcl => "gcl",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "acg" => Ok(Method::Acg),
            "gcg" => Ok(Method::Gcg),
            "acl" => Ok(Method::Acl),
            "gcl" => Ok(Method::Gcl),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (expected acg, gcg, acl or gcl)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How much is known about the training rows stacked above the test rows.
/// Only the global detectors accept `Unsupervised`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Unsupervised,
    SemiSupervised,
    Supervised,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub method: Method,
    pub shape: FactorShape,
    pub policy: TruncationPolicy,
    pub scaler: bool,
    pub mode: Mode,
}

impl DetectorConfig {
    pub fn new(method: Method, shape: FactorShape, policy: TruncationPolicy) -> Self {
        let mode = if method.is_local() {
            Mode::Supervised
        } else {
            Mode::Unsupervised
        };
        Self {
            method,
            shape,
            policy,
            scaler: false,
            mode,
        }
    }

    pub fn with_scaler(mut self, on: bool) -> Self {
        self.scaler = on;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if self.method.is_local() && self.mode != Mode::Supervised {
            return Err(Error::Config(format!(
                "local method {} requires supervised mode",
                self.method
            )));
        }
        if self.method.is_local() && self.shape.len() < 2 {
            return Err(Error::Config(
                "local methods need a shape with at least two factors".into(),
            ));
        }
        Ok(())
    }
}

/// Decision values aligned with the scored rows. Rows with zero norm get
/// `d = 0` and are listed in `flagged`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub flagged: Vec<usize>,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    fn from_rows<F>(rows: &DataMatrix, skip: usize, score: F) -> Self
    where
        F: Fn(usize, &[f64]) -> f64,
    {
        let mut out = ScoreVector::default();
        for (i, row) in rows.row_iter().enumerate().skip(skip) {
            if row.iter().all(|&x| x == 0.0) {
                out.flagged.push(i - skip);
                out.scores.push(0.0);
            } else {
                out.scores.push(score(i, row));
            }
        }
        out
    }
}

fn check_global(test: &DataMatrix, train: Option<&DataMatrix>, cfg: &DetectorConfig) -> Result<()> {
    cfg.validate()?;
    match (cfg.mode, train) {
        (Mode::Unsupervised, Some(_)) => Err(Error::Config(
            "unsupervised mode does not take training rows".into(),
        )),
        (Mode::Supervised | Mode::SemiSupervised, None) => Err(Error::Config(format!(
            "{:?} mode needs training rows",
            cfg.mode
        ))),
        (_, Some(t)) if t.cols() != test.cols() => Err(Error::Dimension(format!(
            "training data has {} features, test data {}",
            t.cols(),
            test.cols()
        ))),
        _ => Ok(()),
    }
}

/// Stacks, scales, pads and compresses. Returns the matrix fed to the
/// compressor and its compressed counterpart, both `N x M'`.
fn compress_globally(
    test: &DataMatrix,
    train: Option<&DataMatrix>,
    cfg: &DetectorConfig,
) -> Result<(DataMatrix, DataMatrix)> {
    let stacked = match train {
        Some(t) => DataMatrix::vstack(t, test)?,
        None => test.clone(),
    };
    let stacked = if cfg.scaler {
        apply_scaler(&stacked, &fit_scaler(&stacked))?
    } else {
        stacked
    };
    let original = pad_features(&stacked, &cfg.shape)?;
    let chain = tt_decompose(&matrix_as_tensor(&original, &cfg.shape)?, &cfg.policy)?;
    let compressed = contract_to_matrix(&chain)?;
    Ok((original, compressed))
}

/// Auto-comparative global detector: `d = <y, y'> / |y|^2` for each test
/// row `y` and its compression `y'`. Training rows, if any, are stacked
/// above the test rows before compression but are not scored.
pub fn acg_score(
    test: &DataMatrix,
    train: Option<&DataMatrix>,
    cfg: &DetectorConfig,
) -> Result<ScoreVector> {
    check_global(test, train, cfg)?;
    let (original, compressed) = compress_globally(test, train, cfg)?;
    let skip = train.map_or(0, DataMatrix::rows);
    Ok(ScoreVector::from_rows(&original, skip, |i, y| {
        dot(y, compressed.row(i)) / dot(y, y)
    }))
}

/// Sum of unit vectors along every non-negligible compressed row.
fn unit_row_sum<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, width: usize) -> Vec<f64> {
    let max = rows.clone().map(norm).fold(0.0, f64::max);
    let mut sum = vec![0.0; width];
    for row in rows {
        let n = norm(row);
        if n > ZERO_ROW_RTOL * max && n > 0.0 {
            for (s, x) in sum.iter_mut().zip(row) {
                *s += x / n;
            }
        }
    }
    sum
}

/// Group-comparative global detector: `d = sum_i cos(y, x'_i)` over every
/// compressed row `x'_i` of the stacked dataset, own row included.
pub fn gcg_score(
    test: &DataMatrix,
    train: Option<&DataMatrix>,
    cfg: &DetectorConfig,
) -> Result<ScoreVector> {
    check_global(test, train, cfg)?;
    let (original, compressed) = compress_globally(test, train, cfg)?;
    let direction = unit_row_sum(compressed.row_iter(), compressed.cols());
    let skip = train.map_or(0, DataMatrix::rows);
    Ok(ScoreVector::from_rows(&original, skip, |_, y| {
        dot(y, &direction) / norm(y)
    }))
}

/// The first `n - 1` cores of a left-orthogonal TT of one normal vector.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalBasis {
    cores: Vec<Core>,
    shape: FactorShape,
    policy: TruncationPolicy,
}

impl OrthogonalBasis {
    pub fn new(cores: Vec<Core>, shape: FactorShape, policy: TruncationPolicy) -> Result<Self> {
        check_links(&cores)?;
        if cores.len() + 1 != shape.len() {
            return Err(Error::Structural(format!(
                "a basis for shape {shape} needs {} cores, got {}",
                shape.len() - 1,
                cores.len()
            )));
        }
        if cores[0].left() != 1 {
            return Err(Error::Structural("first basis core must have left bond 1".into()));
        }
        for (i, (core, &p)) in cores.iter().zip(shape.factors()).enumerate() {
            if core.phys() != p {
                return Err(Error::Structural(format!(
                    "basis core {i} has physical dimension {} but shape factor is {p}",
                    core.phys()
                )));
            }
        }
        policy.validate()?;
        Ok(Self {
            cores,
            shape,
            policy,
        })
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn shape(&self) -> &FactorShape {
        &self.shape
    }

    /// Policy the basis was fitted with.
    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores.iter().map(Core::right).collect()
    }

    pub fn max_isometry_defect(&self) -> f64 {
        self.cores
            .iter()
            .map(Core::left_isometry_defect)
            .fold(0.0, f64::max)
    }
}

/// Fits a local basis on one (unscaled-by-us) normal vector.
pub fn local_fit(train_row: &[f64], cfg: &DetectorConfig) -> Result<OrthogonalBasis> {
    cfg.validate()?;
    let v = pad_vector(train_row, &cfg.shape)?;
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("training vector is all zeros".into()));
    }
    let chain = tt_decompose(&vector_as_tensor(&v, &cfg.shape)?, &cfg.policy)?;
    let mut cores = chain.into_cores();
    cores.pop();
    OrthogonalBasis::new(cores, cfg.shape.clone(), cfg.policy.clone())
}

/// Forces `test_row` into the TT structure of `basis`.
///
/// At step `i` the current remainder is SVD-truncated with `policy.tau(i)`
/// to `T = U Sigma V`, and the remainder for the next step is `B_i^T T`.
/// This equals multiplying `Sigma V` by `C^dagger = B_i^T U` and needs no
/// rank agreement between `U` and `B_i`. The last remainder becomes the
/// final core, and the returned vector is the contraction of the chain
/// (length `shape.product()`).
pub fn local_compress(
    test_row: &[f64],
    basis: &OrthogonalBasis,
    policy: &TruncationPolicy,
) -> Result<Vec<f64>> {
    let v = pad_vector(test_row, &basis.shape)?;
    let dims = basis.shape.factors();
    let n = dims.len();

    let mut remainder = v;
    let mut bond = 1;
    let mut cols = basis.shape.product();
    for (i, core) in basis.cores.iter().enumerate() {
        if remainder.iter().all(|&x| x == 0.0) {
            return Ok(vec![0.0; basis.shape.product()]);
        }
        cols /= dims[i];
        let m = DMatrix::from_row_slice(bond * dims[i], cols, &remainder);
        let truncated = truncated_svd(&m, policy.tau(i + 1)?)?.reconstruct();
        let projected = core.left_matrix().transpose() * truncated;
        remainder = to_row_major(&projected);
        bond = core.right();
    }
    if remainder.iter().all(|&x| x == 0.0) {
        return Ok(vec![0.0; basis.shape.product()]);
    }

    let mut cores = basis.cores.clone();
    cores.push(Core::new(bond, dims[n - 1], 1, remainder)?);
    Ok(tt_contract(&TTChain::new(cores)?)?.into_data())
}

/// Scales `train_row` and every block in `blocks` with one scaler fitted on
/// all of them stacked, when `cfg.scaler` is on.
fn scale_local(
    train_row: &[f64],
    blocks: &[&DataMatrix],
    cfg: &DetectorConfig,
) -> Result<(Vec<f64>, Vec<DataMatrix>)> {
    for b in blocks {
        if b.cols() != train_row.len() {
            return Err(Error::Dimension(format!(
                "training vector has {} features, data has {}",
                train_row.len(),
                b.cols()
            )));
        }
    }
    if !cfg.scaler {
        return Ok((train_row.to_vec(), blocks.iter().map(|b| (*b).clone()).collect()));
    }
    let mut all = DataMatrix::from_row(train_row)?;
    for b in blocks {
        all = DataMatrix::vstack(&all, b)?;
    }
    let params = fit_scaler(&all);
    let train = apply_scaler(&DataMatrix::from_row(train_row)?, &params)?.into_values();
    let scaled = blocks
        .iter()
        .map(|b| apply_scaler(b, &params))
        .collect::<Result<_>>()?;
    Ok((train, scaled))
}

fn compress_rows(rows: &DataMatrix, basis: &OrthogonalBasis, policy: &TruncationPolicy) -> Result<Vec<Vec<f64>>> {
    (0..rows.rows())
        .into_par_iter()
        .map(|i| local_compress(rows.row(i), basis, policy))
        .collect()
}

/// Auto-comparative local detector: `d = <y, y'> / |y|^2` with `y'` the
/// local compression of `y` through the basis fitted on `train_row`.
pub fn acl_score(test: &DataMatrix, train_row: &[f64], cfg: &DetectorConfig) -> Result<ScoreVector> {
    cfg.validate()?;
    let (train, mut scaled) = scale_local(train_row, &[test], cfg)?;
    let test = pad_features(&scaled.remove(0), &cfg.shape)?;
    let basis = local_fit(&train, cfg)?;
    let compressed = compress_rows(&test, &basis, &cfg.policy)?;
    Ok(ScoreVector::from_rows(&test, 0, |i, y| {
        dot(y, &compressed[i]) / dot(y, y)
    }))
}

/// Group-comparative local detector: `d = sum_i cos(y, x'_i)` with `x'_i`
/// the local compression of every row of `reference`.
pub fn gcl_score(
    test: &DataMatrix,
    reference: &DataMatrix,
    train_row: &[f64],
    cfg: &DetectorConfig,
) -> Result<ScoreVector> {
    cfg.validate()?;
    let (train, mut scaled) = scale_local(train_row, &[reference, test], cfg)?;
    let test = pad_features(&scaled.pop().expect("two blocks"), &cfg.shape)?;
    let reference = scaled.pop().expect("two blocks");
    let basis = local_fit(&train, cfg)?;
    let compressed = compress_rows(&reference, &basis, &cfg.policy)?;
    let direction = unit_row_sum(compressed.iter().map(Vec::as_slice), test.cols());
    Ok(ScoreVector::from_rows(&test, 0, |_, y| {
        dot(y, &direction) / norm(y)
    }))
}

/// Runs the detector selected by `cfg.method`.
///
/// Global methods stack `train` above `test` (when given). Local methods
/// fit their basis on the first row of `train`; the group variant compares
/// against the local compressions of all `train` rows followed by all
/// `test` rows.
pub fn run_detector(
    cfg: &DetectorConfig,
    test: &DataMatrix,
    train: Option<&DataMatrix>,
) -> Result<ScoreVector> {
    match cfg.method {
        Method::Acg => acg_score(test, train, cfg),
        Method::Gcg => gcg_score(test, train, cfg),
        Method::Acl | Method::Gcl => {
            let train = train.ok_or_else(|| {
                Error::Config(format!("method {} needs a training row", cfg.method))
            })?;
            if cfg.method == Method::Acl {
                acl_score(test, train.row(0), cfg)
            } else {
                let reference = DataMatrix::vstack(train, test)?;
                gcl_score(test, &reference, train.row(0), cfg)
            }
        }
    }
}
