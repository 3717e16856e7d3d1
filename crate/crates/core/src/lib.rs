//! Anomaly detection by tensor-train compression.
//!
//! A dataset (or a single normal vector) is reshaped into a high-order
//! tensor by factorizing its feature axis, compressed into a truncated
//! tensor train, and every data point is scored by how far compression
//! moves it. Points sharing the dominant structure survive compression;
//! anomalous points are displaced.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: data matrices, factor shapes, row-major index grouping.
//! * [`svd`]: truncated SVD with the relative `sigma_k > tau * sigma_max` rule.
//! * [`tt`]: TT-SVD decomposition and contraction.
//! * [`detectors`]: the global/local, auto/group detectors.
//! * [`preprocess`] and [`metrics`]: standard scaling, sampling, ROC/AUROC.
//! * [`harness`]: CSV loading, tau sweeps, and JSON/CSV reports.
//! * [`storage`]: binary persistence of chains and local bases.

pub mod detectors;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod preprocess;
pub mod storage;
pub mod svd;
pub mod tensor;
pub mod tt;

pub use detectors::{
    acg_score, acl_score, gcg_score, gcl_score, local_compress, local_fit, run_detector,
    DetectorConfig, Method, Mode, OrthogonalBasis, ScoreVector,
};
pub use error::{Error, Result};
pub use metrics::{roc_auroc, Confusion, RocReport};
pub use preprocess::{apply_scaler, fit_scaler, sample_experiment, ScalerParams};
pub use svd::{truncated_svd, TruncatedSvd, TruncationPolicy};
pub use tensor::{DataMatrix, DenseTensor, FactorShape};
pub use tt::{contract_to_matrix, tt_contract, tt_decompose, Core, TTChain};
