//! Tensor-train construction (sequential truncated SVD) and contraction.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::svd::{truncated_svd, TruncationPolicy};
use crate::tensor::{DataMatrix, DenseTensor};

/// One TT core with indices `(left bond, physical, right bond)`, stored
/// row-major. Boundary cores carry a bond of dimension 1 on the open side.
#[derive(Clone, Debug, PartialEq)]
pub struct Core {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<f64>,
}

impl Core {
    pub fn new(left: usize, phys: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if left == 0 || phys == 0 || right == 0 {
            return Err(Error::Structural(format!(
                "core dimensions must be positive, got ({left}, {phys}, {right})"
            )));
        }
        if data.len() != left * phys * right {
            return Err(Error::Structural(format!(
                "core ({left}, {phys}, {right}) needs {} values, got {}",
                left * phys * right,
                data.len()
            )));
        }
        Ok(Self {
            left,
            phys,
            right,
            data,
        })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn phys(&self) -> usize {
        self.phys
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, a: usize, s: usize, b: usize) -> f64 {
        self.data[(a * self.phys + s) * self.right + b]
    }

    /// The `(left * phys) x right` matricization.
    pub fn left_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.left * self.phys, self.right, &self.data)
    }

    /// Largest absolute entry of `M^T M - I` for the left matricization `M`.
    pub fn left_isometry_defect(&self) -> f64 {
        let m = self.left_matrix();
        let gram = m.transpose() * &m;
        (gram - DMatrix::identity(self.right, self.right)).amax()
    }

    pub fn is_left_isometric(&self, tol: f64) -> bool {
        self.left_isometry_defect() <= tol
    }
}

/// An ordered chain of cores whose adjacent bond dimensions agree.
#[derive(Clone, Debug, PartialEq)]
pub struct TTChain {
    cores: Vec<Core>,
}

impl TTChain {
    pub fn new(cores: Vec<Core>) -> Result<Self> {
        check_links(&cores)?;
        let (first, last) = match (cores.first(), cores.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::Structural("a chain needs at least one core".into())),
        };
        if first.left != 1 || last.right != 1 {
            return Err(Error::Structural(format!(
                "open boundary bonds must be 1, got {} and {}",
                first.left, last.right
            )));
        }
        Ok(Self { cores })
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<Core> {
        self.cores
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.cores.iter().map(Core::phys).collect()
    }

    /// Internal bond dimensions `b_1 .. b_{n-1}`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(Core::right)
            .collect()
    }
}

pub(crate) fn check_links(cores: &[Core]) -> Result<()> {
    for (i, pair) in cores.windows(2).enumerate() {
        if pair[0].right != pair[1].left {
            return Err(Error::Structural(format!(
                "bond mismatch between cores {i} and {}: {} vs {}",
                i + 1,
                pair[0].right,
                pair[1].left
            )));
        }
    }
    Ok(())
}

pub(crate) fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// TT-SVD: at step `i` the remainder is grouped as (bond x physical `i`)
/// rows against all later physical indices, truncated with
/// `policy.tau(i)`, `U` becomes core `i` and `Sigma V` is carried on.
///
/// Cores `1..n-1` of the result are left-isometric by construction.
pub fn tt_decompose(t: &DenseTensor, policy: &TruncationPolicy) -> Result<TTChain> {
    let dims = t.dims();
    let n = dims.len();
    if n < 2 {
        return Err(Error::Dimension(format!(
            "TT decomposition needs a tensor of order >= 2, got {n}"
        )));
    }
    policy.validate()?;

    let mut cores = Vec::with_capacity(n);
    let mut bond = 1;
    let mut cols: usize = dims[1..].iter().product();
    let mut remainder = DMatrix::from_row_slice(dims[0], cols, t.data());

    for (i, &phys) in dims[..n - 1].iter().enumerate() {
        let svd = truncated_svd(&remainder, policy.tau(i + 1)?)?;
        let rank = svd.rank();
        cores.push(Core::new(bond, phys, rank, to_row_major(&svd.u))?);

        let carried = to_row_major(&svd.sigma_v());
        let next = dims[i + 1];
        cols /= next;
        remainder = DMatrix::from_row_slice(rank * next, cols, &carried);
        bond = rank;
    }
    cores.push(Core::new(bond, dims[n - 1], 1, to_row_major(&remainder))?);
    TTChain::new(cores)
}

/// Dense contraction of a chain, left to right.
pub fn tt_contract(chain: &TTChain) -> Result<DenseTensor> {
    check_links(&chain.cores)?;
    let first = &chain.cores[0];
    let mut rows = first.phys;
    let mut acc = DMatrix::from_row_slice(rows, first.right, &first.data);
    for core in &chain.cores[1..] {
        let next = DMatrix::from_row_slice(core.left, core.phys * core.right, &core.data);
        let product = acc * next;
        rows *= core.phys;
        acc = DMatrix::from_row_slice(rows, core.right, &to_row_major(&product));
    }
    DenseTensor::new(chain.phys_dims(), acc.as_slice().to_vec())
}

/// Contracts a chain whose first physical index runs over data rows and
/// returns the `N x M'` matrix it represents.
pub fn contract_to_matrix(chain: &TTChain) -> Result<DataMatrix> {
    let t = tt_contract(chain)?;
    if t.order() < 2 {
        return Err(Error::Structural(
            "a data chain needs a row core and at least one feature core".into(),
        ));
    }
    t.to_matrix()
}
