//! Brute-force reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's numerical code. Singular values and
//! left singular subspaces come from symmetric eigendecompositions of Gram
//! matrices, TT-SVD is replayed as a sequence of dense orthogonal projectors
//! acting on explicit unfoldings of the full tensor, and decision values are
//! evaluated straight from their defining formulas.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a Gram matrix at or below this fraction of the largest are
/// numerical noise (they correspond to singular values below ~1e-6 of the
/// largest, which random test data never has).
const GRAM_NOISE: f64 = 1e-12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_values(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Non-increasing singular values of `m` from the eigenvalues of the smaller
/// Gram matrix.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let mut s: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthogonal projector onto the span of the left singular vectors of `m`
/// whose singular values pass `sigma > tau * sigma_max` (at least one kept).
pub fn left_projector(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m * m.transpose());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lmax = eig.eigenvalues[order[0]];
    let mut p = DMatrix::zeros(m.nrows(), m.nrows());
    for (k, &i) in order.iter().enumerate() {
        let l = eig.eigenvalues[i];
        let keep = k == 0 || (l > GRAM_NOISE * lmax && l.max(0.0).sqrt() > tau * lmax.sqrt());
        if !keep {
            break;
        }
        let u = eig.eigenvectors.column(i);
        p += u * u.transpose();
    }
    p
}

/// Unfolding of a row-major tensor: the first `k` indices become rows.
pub fn unfold(data: &[f64], dims: &[usize], k: usize) -> DMatrix<f64> {
    let rows: usize = dims[..k].iter().product();
    let cols: usize = dims[k..].iter().product();
    DMatrix::from_fn(rows, cols, |r, c| data[r * cols + c])
}

pub fn fold(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)]);
        }
    }
    out
}

/// The tensor represented by the truncated TT-SVD of `data`, replayed in
/// the full space: at step `k` the `k`-th unfolding is projected onto its
/// leading left singular subspace. Returns the reconstruction and the
/// projector used at every step.
pub fn tt_reconstruct(data: &[f64], dims: &[usize], taus: &[f64]) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let mut x = data.to_vec();
    let mut projectors = Vec::new();
    for k in 1..dims.len() {
        let a = unfold(&x, dims, k);
        let p = left_projector(&a, taus[k - 1]);
        x = fold(&(&p * a));
        projectors.push(p);
    }
    (x, projectors)
}

/// Local compression of `y` through the basis of `train`: every step
/// truncates the current unfolding of `y` and then projects it onto the
/// subspace spanned by the training basis up to that step.
pub fn local_compress(y: &[f64], train: &[f64], dims: &[usize], taus: &[f64]) -> Vec<f64> {
    let (_, basis) = tt_reconstruct(train, dims, taus);
    let mut x = y.to_vec();
    for k in 1..dims.len() {
        let a = unfold(&x, dims, k);
        let truncated = left_projector(&a, taus[k - 1]) * a;
        x = fold(&(&basis[k - 1] * truncated));
    }
    x
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn pad(row: &[f64], width: usize) -> Vec<f64> {
    let mut v = row.to_vec();
    v.resize(width, 0.0);
    v
}

/// Column-wise `(x - mean) / std` with population std (1 for constant
/// columns), fitted on `fit` and applied to `rows`.
pub fn standardize(fit: &[Vec<f64>], rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = fit.len() as f64;
    let m = fit[0].len();
    let mean: Vec<f64> = (0..m).map(|j| fit.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let std: Vec<f64> = (0..m)
        .map(|j| {
            let v = fit.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            if v > 0.0 {
                v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    rows.iter()
        .map(|r| (0..m).map(|j| (r[j] - mean[j]) / std[j]).collect())
        .collect()
}

/// Self-comparison decision value, `0` for a zero row.
pub fn auto_decision(y: &[f64], compressed: &[f64]) -> f64 {
    let yy = dot(y, y);
    if yy == 0.0 {
        0.0
    } else {
        dot(y, compressed) / yy
    }
}

/// Sum of cosines between `y` and every compressed row; compressed rows
/// that are numerically zero contribute nothing.
pub fn group_decision(y: &[f64], compressed: &[Vec<f64>]) -> f64 {
    let ny = norm(y);
    if ny == 0.0 {
        return 0.0;
    }
    let max = compressed.iter().map(|c| norm(c)).fold(0.0, f64::max);
    compressed
        .iter()
        .filter(|c| norm(c) > 1e-12 * max)
        .map(|c| dot(y, c) / (ny * norm(c)))
        .sum()
}

/// Global compression of the stacked rows (train first). Returns the padded
/// original rows and their compressed counterparts.
pub fn global_compress(
    rows: &[Vec<f64>],
    shape: &[usize],
    tau: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let width: usize = shape.iter().product();
    let padded: Vec<Vec<f64>> = rows.iter().map(|r| pad(r, width)).collect();
    let flat: Vec<f64> = padded.concat();
    let mut dims = vec![rows.len()];
    dims.extend_from_slice(shape);
    let taus = vec![tau; shape.len()];
    let (x, _) = tt_reconstruct(&flat, &dims, &taus);
    let compressed = x.chunks(width).map(<[f64]>::to_vec).collect();
    (padded, compressed)
}

pub fn acg(test: &[Vec<f64>], train: &[Vec<f64>], shape: &[usize], tau: f64, scaler: bool) -> Vec<f64> {
    let stacked = stack(train, test, scaler);
    let (orig, comp) = global_compress(&stacked, shape, tau);
    (train.len()..stacked.len())
        .map(|i| auto_decision(&orig[i], &comp[i]))
        .collect()
}

pub fn gcg(test: &[Vec<f64>], train: &[Vec<f64>], shape: &[usize], tau: f64, scaler: bool) -> Vec<f64> {
    let stacked = stack(train, test, scaler);
    let (orig, comp) = global_compress(&stacked, shape, tau);
    (train.len()..stacked.len())
        .map(|i| group_decision(&orig[i], &comp))
        .collect()
}

pub fn acl(test: &[Vec<f64>], train_row: &[f64], shape: &[usize], tau: f64) -> Vec<f64> {
    let width: usize = shape.iter().product();
    let taus = vec![tau; shape.len() - 1];
    let t = pad(train_row, width);
    test.iter()
        .map(|r| {
            let y = pad(r, width);
            auto_decision(&y, &local_compress(&y, &t, shape, &taus))
        })
        .collect()
}

pub fn gcl(test: &[Vec<f64>], reference: &[Vec<f64>], train_row: &[f64], shape: &[usize], tau: f64) -> Vec<f64> {
    let width: usize = shape.iter().product();
    let taus = vec![tau; shape.len() - 1];
    let t = pad(train_row, width);
    let compressed: Vec<Vec<f64>> = reference
        .iter()
        .map(|r| local_compress(&pad(r, width), &t, shape, &taus))
        .collect();
    test.iter()
        .map(|r| group_decision(&pad(r, width), &compressed))
        .collect()
}

fn stack(train: &[Vec<f64>], test: &[Vec<f64>], scaler: bool) -> Vec<Vec<f64>> {
    let all: Vec<Vec<f64>> = train.iter().chain(test).cloned().collect();
    if scaler {
        standardize(&all, &all)
    } else {
        all
    }
}

/// Mann-Whitney AUROC with anomalies as positives and `-d` as the score:
/// the fraction of (anomaly, normal) pairs where the anomaly has the lower
/// decision value, ties counting one half.
pub fn pairwise_auroc(decision: &[f64], is_anomaly: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &di) in decision.iter().enumerate() {
        if !is_anomaly[i] {
            continue;
        }
        for (j, &dj) in decision.iter().enumerate() {
            if is_anomaly[j] {
                continue;
            }
            pairs += 1.0;
            if di < dj {
                wins += 1.0;
            } else if di == dj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn to_rows(values: &[f64], cols: usize) -> Vec<Vec<f64>> {
    values.chunks(cols).map(<[f64]>::to_vec).collect()
}
