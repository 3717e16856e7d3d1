//! The relative retention rule `sigma_k > tau * sigma_max` on a matrix with
//! known singular values.
//!
//! cargo run --example truncated_svd

use nalgebra::DMatrix;
use tt_anomaly::truncated_svd;

fn main() -> tt_anomaly::Result<()> {
    // diag(10, 5, 2, 1, 0.1) rotated by a fixed orthogonal matrix.
    let q = DMatrix::from_fn(5, 5, |i, j| ((i * 5 + j) as f64 * 0.7).sin()).qr().q();
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![10.0, 5.0, 2.0, 1.0, 0.1]));
    let m = &q * s * q.transpose();

    for tau in [0.0, 0.05, 0.15, 0.3, 0.5, 1.0] {
        let svd = truncated_svd(&m, tau)?;
        let err = (svd.reconstruct() - &m).norm();
        println!("tau {tau:<4}  kept {:?}  error {err:.4}", svd.singular.iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>());
    }
    Ok(())
}
