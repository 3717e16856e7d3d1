//! Standard scaling and seeded experiment sampling.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DataMatrix;

/// Per-column mean and population standard deviation. Zero-variance
/// columns are stored with `std = 1` and flagged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub zero_variance: Vec<bool>,
}

impl ScalerParams {
    pub fn identity(cols: usize) -> Self {
        Self {
            mean: vec![0.0; cols],
            std: vec![1.0; cols],
            zero_variance: vec![false; cols],
        }
    }

    pub fn cols(&self) -> usize {
        self.mean.len()
    }
}

pub fn fit_scaler(m: &DataMatrix) -> ScalerParams {
    let n = m.rows() as f64;
    let cols = m.cols();
    let mut mean = vec![0.0; cols];
    for row in m.row_iter() {
        for (acc, x) in mean.iter_mut().zip(row) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|x| *x /= n);

    let mut var = vec![0.0; cols];
    for row in m.row_iter() {
        for ((acc, x), mu) in var.iter_mut().zip(row).zip(&mean) {
            *acc += (x - mu) * (x - mu);
        }
    }
    let mut zero_variance = vec![false; cols];
    let std = var
        .iter()
        .zip(zero_variance.iter_mut())
        .map(|(v, flag)| {
            let s = (v / n).sqrt();
            if s > 0.0 {
                s
            } else {
                *flag = true;
                1.0
            }
        })
        .collect();
    ScalerParams {
        mean,
        std,
        zero_variance,
    }
}

pub fn apply_scaler(m: &DataMatrix, p: &ScalerParams) -> Result<DataMatrix> {
    check_width(m, p)?;
    let values = m
        .row_iter()
        .flat_map(|row| {
            row.iter()
                .zip(&p.mean)
                .zip(&p.std)
                .map(|((x, mu), s)| (x - mu) / s)
        })
        .collect();
    DataMatrix::new(m.rows(), m.cols(), values)
}

pub fn inverse_scaler(m: &DataMatrix, p: &ScalerParams) -> Result<DataMatrix> {
    check_width(m, p)?;
    let values = m
        .row_iter()
        .flat_map(|row| {
            row.iter()
                .zip(&p.mean)
                .zip(&p.std)
                .map(|((x, mu), s)| x * s + mu)
        })
        .collect();
    DataMatrix::new(m.rows(), m.cols(), values)
}

/// Fits on `m` and returns the scaled matrix.
pub fn standardize(m: &DataMatrix) -> Result<DataMatrix> {
    apply_scaler(m, &fit_scaler(m))
}

fn check_width(m: &DataMatrix, p: &ScalerParams) -> Result<()> {
    if m.cols() != p.cols() {
        return Err(Error::Dimension(format!(
            "scaler fitted on {} columns applied to {}",
            p.cols(),
            m.cols()
        )));
    }
    Ok(())
}

/// A sampled evaluation set: `is_anomaly[i]` is the ground truth for row `i`
/// of `data`, and `source_rows[i]` its row in the original dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub data: DataMatrix,
    pub is_anomaly: Vec<bool>,
    pub source_rows: Vec<usize>,
}

/// Draws `n_normal` rows of `normal_class` and `n_anomalous` rows pooled from
/// every other class, uniformly without replacement. Normal rows come first;
/// each block keeps dataset order.
pub fn sample_experiment(
    data: &DataMatrix,
    labels: &[i64],
    normal_class: i64,
    n_normal: usize,
    n_anomalous: usize,
    seed: u64,
) -> Result<Sample> {
    if labels.len() != data.rows() {
        return Err(Error::Dimension(format!(
            "{} labels for {} rows",
            labels.len(),
            data.rows()
        )));
    }
    let (normal, anomalous): (Vec<usize>, Vec<usize>) =
        (0..labels.len()).partition(|&i| labels[i] == normal_class);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |pool: &[usize], k: usize, kind: &'static str| -> Result<Vec<usize>> {
        if k > pool.len() {
            return Err(Error::Sampling {
                kind,
                requested: k,
                available: pool.len(),
            });
        }
        let mut picked: Vec<usize> = index::sample(&mut rng, pool.len(), k)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        picked.sort_unstable();
        Ok(picked)
    };
    let mut rows = draw(&normal, n_normal, "normal")?;
    rows.extend(draw(&anomalous, n_anomalous, "anomalous")?);

    let mut is_anomaly = vec![false; n_normal];
    is_anomaly.resize(n_normal + n_anomalous, true);
    Ok(Sample {
        data: data.select_rows(&rows)?,
        is_anomaly,
        source_rows: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column_is_flagged() {
        let m = DataMatrix::from_rows(&[[3.0, 0.0], [3.0, 2.0]]).unwrap();
        let p = fit_scaler(&m);
        assert_eq!(p.mean, vec![3.0, 1.0]);
        assert_eq!(p.std, vec![1.0, 1.0]);
        assert_eq!(p.zero_variance, vec![true, false]);
    }

    #[test]
    fn hand_computed_moments() {
        let m = DataMatrix::from_rows(&[[1.0, 10.0], [2.0, 20.0], [6.0, 0.0]]).unwrap();
        let p = fit_scaler(&m);
        assert!((p.mean[0] - 3.0).abs() < 1e-15);
        assert!((p.mean[1] - 10.0).abs() < 1e-15);
        // population variances: (4 + 1 + 9) / 3 and (0 + 100 + 100) / 3
        assert!((p.std[0] - (14.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((p.std[1] - (200.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn scaled_columns_are_centred_and_invertible() {
        let m = DataMatrix::from_rows(&[[1.0, 5.0, 7.0], [2.0, -1.0, 7.0], [9.0, 0.5, 7.0]]).unwrap();
        let p = fit_scaler(&m);
        let s = apply_scaler(&m, &p).unwrap();
        for c in 0..3 {
            let mean: f64 = s.row_iter().map(|r| r[c]).sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-10);
        }
        let back = inverse_scaler(&s, &p).unwrap();
        for (a, b) in back.values().iter().zip(m.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(apply_scaler(&m, &ScalerParams::identity(3)).unwrap(), m);
        assert!(apply_scaler(&m, &ScalerParams::identity(2)).is_err());
    }

    #[test]
    fn sampling_is_seeded_and_balanced() {
        let rows: Vec<[f64; 2]> = (0..40).map(|i| [i as f64, 1.0]).collect();
        let m = DataMatrix::from_rows(&rows).unwrap();
        let labels: Vec<i64> = (0..40).map(|i| i % 4).collect();
        let a = sample_experiment(&m, &labels, 1, 5, 8, 42).unwrap();
        let b = sample_experiment(&m, &labels, 1, 5, 8, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.data.rows(), 13);
        assert_eq!(a.is_anomaly.iter().filter(|&&x| !x).count(), 5);
        for (&src, &anom) in a.source_rows.iter().zip(&a.is_anomaly) {
            assert_eq!(labels[src] != 1, anom);
        }
        let c = sample_experiment(&m, &labels, 1, 5, 8, 43).unwrap();
        assert_ne!(a.source_rows, c.source_rows);
    }

    #[test]
    fn sampling_reports_shortfall() {
        let m = DataMatrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let err = sample_experiment(&m, &[0, 0, 1], 0, 3, 1, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::Sampling { kind: "normal", requested: 3, available: 2 }
        ));
    }
}
