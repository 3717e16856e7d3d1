//! Truncated SVD with the relative retention rule `sigma_k > tau * sigma_max`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values at or below `ABSOLUTE_FLOOR * sigma_max` are treated as
/// zero regardless of tau.
pub const ABSOLUTE_FLOOR: f64 = 1e-14;

/// `U (p x r) * diag(singular) * V (r x q)` with `r >= 1`.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.singular.len()
    }

    /// `diag(singular) * V`, the remainder carried to the next TT step.
    pub fn sigma_v(&self) -> DMatrix<f64> {
        let mut sv = self.v.clone();
        for (mut row, s) in sv.row_iter_mut().zip(&self.singular) {
            row *= *s;
        }
        sv
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * self.sigma_v()
    }
}

/// Either one tau for every SVD step or an explicit per-step list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    Uniform(f64),
    PerStep(Vec<f64>),
}

impl TruncationPolicy {
    pub fn uniform(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self::Uniform(tau))
    }

    pub fn per_step(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::Config("per-step tau list is empty".into()));
        }
        for &t in &taus {
            check_tau(t)?;
        }
        Ok(Self::PerStep(taus))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Uniform(t) => check_tau(*t),
            Self::PerStep(ts) if ts.is_empty() => {
                Err(Error::Config("per-step tau list is empty".into()))
            }
            Self::PerStep(ts) => ts.iter().try_for_each(|&t| check_tau(t)),
        }
    }

    /// Tau for the 1-based SVD `step` (the step that produces core `step`).
    pub fn tau(&self, step: usize) -> Result<f64> {
        if step == 0 {
            return Err(Error::Config("SVD steps are numbered from 1".into()));
        }
        match self {
            Self::Uniform(t) => Ok(*t),
            Self::PerStep(ts) => ts.get(step - 1).copied().ok_or_else(|| {
                Error::Config(format!(
                    "tau list has {} entries but step {step} was requested",
                    ts.len()
                ))
            }),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")))
    }
}

/// Number of leading singular values kept from a non-increasing list.
pub fn retained_rank(singular: &[f64], tau: f64) -> usize {
    let Some(&max) = singular.first() else {
        return 0;
    };
    let cut = (tau * max).max(ABSOLUTE_FLOOR * max);
    singular.iter().take_while(|&&s| s > cut).count().max(1)
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations: `(U, sigma, V^T)` with
/// `min(p, q)` singular values in non-increasing order.
///
/// Columns of `U` belonging to zero singular values are left as zero.
pub fn jacobi_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    if m.nrows() < m.ncols() {
        let (u, s, v_t) = jacobi_svd(&m.transpose());
        return (v_t.transpose(), s, u.transpose());
    }
    let (rows, n) = m.shape();
    let mut a: Vec<Vec<f64>> = m.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (alpha, beta, gamma) = a[i].iter().zip(&a[j]).fold(
                    (0.0, 0.0, 0.0),
                    |(al, be, ga), (x, y)| (al + x * x, be + y * y, ga + x * y),
                );
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let mut u = DMatrix::zeros(rows, n);
    let mut v_t = DMatrix::zeros(n, n);
    let mut singular = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        singular.push(sigma);
        if sigma > 0.0 {
            for (r, x) in a[src].iter().enumerate() {
                u[(r, k)] = x / sigma;
            }
        }
        for (c, x) in v[src].iter().enumerate() {
            v_t[(k, c)] = *x;
        }
    }
    (u, singular, v_t)
}

const MAX_SWEEPS: usize = 100;

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// SVD of `m` keeping exactly the singular values with
/// `sigma_k > tau * sigma_max` (and always at least the largest).
///
/// Signs are fixed so the largest-magnitude entry of every left singular
/// vector is positive; the first such entry wins on ties.
pub fn truncated_svd(m: &DMatrix<f64>, tau: f64) -> Result<TruncatedSvd> {
    check_tau(tau)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Dimension("cannot decompose an empty matrix".into()));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("matrix contains non-finite values".into()));
    }
    if m.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("all-zero matrix has no singular values".into()));
    }

    let (u, singular, v_t) = jacobi_svd(m);
    let rank = retained_rank(&singular, tau);

    let mut u = u.columns(0, rank).into_owned();
    let mut v = v_t.rows(0, rank).into_owned();
    for k in 0..rank {
        let col = u.column(k);
        let mut pivot = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            u.column_mut(k).neg_mut();
            v.row_mut(k).neg_mut();
        }
    }

    Ok(TruncatedSvd {
        u,
        singular: singular[..rank].to_vec(),
        v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(p: usize, q: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(p, q, |_, _| rng.random_range(-1.0..1.0))
    }

    fn orthonormal_defect(m: &DMatrix<f64>) -> f64 {
        let g = m.transpose() * m;
        (g - DMatrix::identity(m.ncols(), m.ncols())).amax()
    }

    #[test]
    fn identity_keeps_everything() {
        let s = truncated_svd(&DMatrix::identity(3, 3), 0.5).unwrap();
        assert_eq!(s.rank(), 3);
        assert!(s.singular.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn diagonal_threshold_is_strict() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 2.0, 1.0]));
        let s = truncated_svd(&m, 0.3).unwrap();
        assert_eq!(s.rank(), 2);
        assert!((s.singular[0] - 4.0).abs() < 1e-14 && (s.singular[1] - 2.0).abs() < 1e-14);
        // 0.5 * 4 == 2 exactly, so sigma = 2 is dropped.
        assert_eq!(truncated_svd(&m, 0.5).unwrap().rank(), 1);
    }

    #[test]
    fn rank_one_stays_rank_one() {
        let u = nalgebra::DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let v = nalgebra::DVector::from_vec(vec![0.5, 1.0, 0.0, 2.0]);
        let m = &u * v.transpose();
        for tau in [0.0, 0.2, 0.9] {
            assert_eq!(truncated_svd(&m, tau).unwrap().rank(), 1);
        }
    }

    #[test]
    fn tau_one_keeps_exactly_one() {
        for seed in 0..5 {
            assert_eq!(truncated_svd(&random(6, 4, seed), 1.0).unwrap().rank(), 1);
        }
    }

    #[test]
    fn full_rank_reconstruction() {
        let m = random(8, 8, 7);
        let s = truncated_svd(&m, 0.0).unwrap();
        let err = (s.reconstruct() - &m).norm() / m.norm();
        assert!(err <= 1e-10, "relative error {err}");
        assert!(orthonormal_defect(&s.u) < 1e-10);
        assert!(orthonormal_defect(&s.v.transpose()) < 1e-10);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(matches!(
            truncated_svd(&DMatrix::zeros(3, 2), 0.1),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sign_convention_is_positive_pivot() {
        let s = truncated_svd(&random(5, 7, 3), 0.0).unwrap();
        for col in s.u.column_iter() {
            let pivot = col.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(pivot > 0.0);
        }
    }

    #[test]
    fn policy_lookup() {
        assert_eq!(TruncationPolicy::uniform(0.01).unwrap().tau(5).unwrap(), 0.01);
        let list = TruncationPolicy::per_step(vec![0.1, 0.2]).unwrap();
        assert_eq!(list.tau(2).unwrap(), 0.2);
        assert!(matches!(
            TruncationPolicy::per_step(vec![0.1]).unwrap().tau(2),
            Err(Error::Config(_))
        ));
        assert!(TruncationPolicy::uniform(1.5).is_err());
        assert!(TruncationPolicy::per_step(vec![0.1, -0.1]).is_err());
    }

    #[test]
    fn rank_is_monotone_in_tau() {
        let m = random(10, 12, 11);
        let mut last = usize::MAX;
        for i in 0..=20 {
            let r = truncated_svd(&m, i as f64 / 20.0).unwrap().rank();
            assert!(r <= last);
            last = r;
        }
    }

    #[test]
    fn discarded_energy_matches_error() {
        let m = random(9, 6, 5);
        let full = truncated_svd(&m, 0.0).unwrap();
        for tau in [0.1, 0.3, 0.7] {
            let s = truncated_svd(&m, tau).unwrap();
            let tail: f64 = full.singular[s.rank()..].iter().map(|x| x * x).sum();
            let err = (s.reconstruct() - &m).norm();
            assert!((err - tail.sqrt()).abs() < 1e-8);
        }
    }
}
