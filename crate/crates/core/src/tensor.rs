//! Dense data containers and index bookkeeping.
//!
//! All multi-index linearization in this crate is row-major: the last
//! factor varies fastest. The global and local detectors both rely on this
//! exact convention, since it decides which feature groups end up sharing a
//! TT core.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `N x M` real matrix stored row-major. Rows are data points, columns
/// are features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    /// A single-row matrix.
    pub fn from_row(row: &[f64]) -> Result<Self> {
        Self::new(1, row.len(), row.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.cols)
    }

    /// Stacks `top` above `bottom`, preserving row order within each block.
    pub fn vstack(top: &DataMatrix, bottom: &DataMatrix) -> Result<Self> {
        if top.cols != bottom.cols {
            return Err(Error::Dimension(format!(
                "cannot stack matrices with {} and {} columns",
                top.cols, bottom.cols
            )));
        }
        let mut values = Vec::with_capacity(top.values.len() + bottom.values.len());
        values.extend_from_slice(&top.values);
        values.extend_from_slice(&bottom.values);
        Ok(Self {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            values,
        })
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::Bounds {
                    index: i,
                    dim: self.rows,
                    axis: 0,
                });
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.cols, values)
    }
}

/// Ordered factorization `[d1, ..., dk]` of the (padded) feature width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FactorShape(Vec<usize>);

impl FactorShape {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Config("factor shape must have at least one factor".into()));
        }
        if let Some(&bad) = factors.iter().find(|&&d| d < 2) {
            return Err(Error::Config(format!(
                "factor shape entries must be >= 2, got {bad}"
            )));
        }
        if factors
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .is_none()
        {
            return Err(Error::Config("factor shape product overflows".into()));
        }
        Ok(Self(factors))
    }

    pub fn factors(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Padded feature width `M'`.
    pub fn product(&self) -> usize {
        self.0.iter().product()
    }
}

impl TryFrom<Vec<usize>> for FactorShape {
    type Error = Error;

    fn try_from(factors: Vec<usize>) -> Result<Self> {
        Self::new(factors)
    }
}

impl From<FactorShape> for Vec<usize> {
    fn from(shape: FactorShape) -> Self {
        shape.0
    }
}

impl FromStr for FactorShape {
    type Err = Error;

    /// Parses a comma-separated list such as `2,2,2,2,2,2`.
    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Config(format!("bad shape factor {p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }
}

impl fmt::Display for FactorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Row-major linear index of `multi_index` within `dims`.
pub fn group_indices(multi_index: &[usize], dims: &[usize]) -> Result<usize> {
    if multi_index.len() != dims.len() {
        return Err(Error::Dimension(format!(
            "multi-index has {} entries but there are {} dimensions",
            multi_index.len(),
            dims.len()
        )));
    }
    let mut linear = 0usize;
    for (axis, (&i, &d)) in multi_index.iter().zip(dims).enumerate() {
        if i >= d {
            return Err(Error::Bounds { index: i, dim: d, axis });
        }
        linear = linear * d + i;
    }
    Ok(linear)
}

/// Inverse of [`group_indices`].
pub fn split_indices(linear: usize, dims: &[usize]) -> Result<Vec<usize>> {
    let total: usize = dims.iter().product();
    if linear >= total {
        return Err(Error::Bounds {
            index: linear,
            dim: total,
            axis: 0,
        });
    }
    let mut out = vec![0; dims.len()];
    let mut rest = linear;
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = rest % d;
        rest /= d;
    }
    Ok(out)
}

/// A bijection between two index sets with equal total size, realised by
/// grouping in the source dimensions and splitting in the target ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap {
    source: Vec<usize>,
    target: Vec<usize>,
}

impl IndexMap {
    pub fn new(source: Vec<usize>, target: Vec<usize>) -> Result<Self> {
        let a: usize = source.iter().product();
        let b: usize = target.iter().product();
        if a != b {
            return Err(Error::Dimension(format!(
                "index sets {source:?} and {target:?} have different sizes ({a} vs {b})"
            )));
        }
        Ok(Self { source, target })
    }

    pub fn source(&self) -> &[usize] {
        &self.source
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn forward(&self, multi_index: &[usize]) -> Result<Vec<usize>> {
        split_indices(group_indices(multi_index, &self.source)?, &self.target)
    }

    pub fn backward(&self, multi_index: &[usize]) -> Result<Vec<usize>> {
        split_indices(group_indices(multi_index, &self.target)?, &self.source)
    }
}

/// Appends zero columns so the feature width equals `shape.product()`.
pub fn pad_features(m: &DataMatrix, shape: &FactorShape) -> Result<DataMatrix> {
    let width = shape.product();
    if width < m.cols {
        return Err(Error::Dimension(format!(
            "shape {shape} has product {width}, smaller than the {} features",
            m.cols
        )));
    }
    if width == m.cols {
        return Ok(m.clone());
    }
    let mut values = Vec::with_capacity(m.rows * width);
    for row in m.row_iter() {
        values.extend_from_slice(row);
        values.resize(values.len() + width - m.cols, 0.0);
    }
    DataMatrix::new(m.rows, width, values)
}

/// Zero-pads a single vector to `shape.product()`.
pub fn pad_vector(v: &[f64], shape: &FactorShape) -> Result<Vec<f64>> {
    let width = shape.product();
    if width < v.len() {
        return Err(Error::Dimension(format!(
            "shape {shape} has product {width}, smaller than the vector length {}",
            v.len()
        )));
    }
    let mut out = v.to_vec();
    out.resize(width, 0.0);
    Ok(out)
}

/// Dense row-major tensor of arbitrary order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid tensor dimensions {dims:?}")));
        }
        let size: usize = dims.iter().product();
        if size != data.len() {
            return Err(Error::Dimension(format!(
                "tensor of dims {dims:?} needs {size} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        Ok(self.data[group_indices(index, &self.dims)?])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Groups the first axis against all remaining ones, giving back a
    /// `dims[0] x rest` matrix. Inverse of [`matrix_as_tensor`].
    pub fn to_matrix(&self) -> Result<DataMatrix> {
        let rows = self.dims[0];
        DataMatrix::new(rows, self.data.len() / rows, self.data.clone())
    }
}

/// Splits the column index of `m` according to `shape`, yielding an order
/// `1 + k` tensor whose first axis is the data-point index.
pub fn matrix_as_tensor(m: &DataMatrix, shape: &FactorShape) -> Result<DenseTensor> {
    if m.cols != shape.product() {
        return Err(Error::Dimension(format!(
            "matrix has {} columns but shape {shape} has product {}; pad first",
            m.cols,
            shape.product()
        )));
    }
    let mut dims = Vec::with_capacity(shape.len() + 1);
    dims.push(m.rows);
    dims.extend_from_slice(shape.factors());
    DenseTensor::new(dims, m.values.clone())
}

/// Splits a single feature vector according to `shape` (order `k` tensor, no
/// row axis).
pub fn vector_as_tensor(v: &[f64], shape: &FactorShape) -> Result<DenseTensor> {
    if v.len() != shape.product() {
        return Err(Error::Dimension(format!(
            "vector has length {} but shape {shape} has product {}",
            v.len(),
            shape.product()
        )));
    }
    DenseTensor::new(shape.factors().to_vec(), v.to_vec())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
