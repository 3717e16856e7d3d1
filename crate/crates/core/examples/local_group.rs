//! Group-comparative local detection on a small synthetic set: each test
//! row is compared with the local compressions of a reference set.
//!
//! cargo run --example local_group

use tt_anomaly::{gcl_score, DataMatrix, DetectorConfig, FactorShape, Method, TruncationPolicy};

fn main() -> tt_anomaly::Result<()> {
    let ramp: Vec<f64> = (0..8).map(|i| 1.0 + i as f64 * 0.25).collect();
    let reference = DataMatrix::from_rows(&[
        ramp.iter().map(|x| x * 1.1).collect::<Vec<_>>(),
        ramp.iter().map(|x| x * 0.9).collect(),
        ramp.iter().rev().copied().collect(),
    ])?;
    let test = DataMatrix::from_rows(&[
        ramp.iter().map(|x| x * 2.0).collect::<Vec<_>>(),
        vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
        vec![0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0],
    ])?;
    let shape = FactorShape::new(vec![2, 2, 2])?;
    for tau in [0.0, 0.1, 0.3] {
        let cfg = DetectorConfig::new(Method::Gcl, shape.clone(), TruncationPolicy::uniform(tau)?);
        let s = gcl_score(&test, &reference, &ramp, &cfg)?;
        println!("tau {tau:.1}  scores {:?}", s.scores.iter().map(|d| (d * 1e4).round() / 1e4).collect::<Vec<_>>());
    }
    Ok(())
}
