//! Auto-comparative local detection: fit a basis on one normal digit image
//! and force every sampled image through it.
//!
//! cargo run --release --example local_auto -- [digit]

use std::path::Path;

use tt_anomaly::harness::load_csv;
use tt_anomaly::{acl_score, local_fit, roc_auroc, sample_experiment, DetectorConfig, FactorShape, Method, TruncationPolicy};

fn main() -> tt_anomaly::Result<()> {
    let digit: i64 = std::env::args().nth(1).map_or(1, |a| a.parse().expect("digit"));
    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/digits.csv");
    let (data, labels) = load_csv(input, true, Some("label"))?;
    let labels = labels.expect("label column");

    let sample = sample_experiment(&data, &labels, digit, 100, 100, 11)?;
    let train_idx = (0..labels.len())
        .find(|i| labels[*i] == digit && !sample.source_rows.contains(i))
        .expect("a spare normal row");
    let train = data.row(train_idx);

    let shape = FactorShape::new(vec![2; 6])?;
    let basis = local_fit(train, &DetectorConfig::new(Method::Acl, shape.clone(), TruncationPolicy::uniform(0.0)?))?;
    println!("training row {train_idx}, untruncated basis bonds {:?}", basis.bond_dims());

    for tau in [0.0, 0.02, 0.05, 0.1, 0.2, 0.3] {
        let cfg = DetectorConfig::new(Method::Acl, shape.clone(), TruncationPolicy::uniform(tau)?);
        let s = acl_score(&sample.data, train, &cfg)?;
        let r = roc_auroc(&s.scores, &sample.is_anomaly)?;
        println!("tau {tau:.2}  AUROC {:.3}  accuracy {:.3}", r.auroc, r.accuracy);
    }
    Ok(())
}
