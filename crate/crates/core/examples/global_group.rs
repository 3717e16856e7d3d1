//! Group-comparative global detection, unsupervised and with a block of
//! known-normal training rows stacked on top.
//!
//! cargo run --example global_group

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_anomaly::{gcg_score, roc_auroc, DataMatrix, DetectorConfig, FactorShape, Method, Mode, TruncationPolicy};

/// Rows near one of two prototypes, plus scattered anomalies.
fn synthetic(rng: &mut ChaCha8Rng, normal: usize, anomalous: usize) -> (DataMatrix, Vec<bool>) {
    let protos = [
        (0..16).map(|i| ((i as f64) * 0.4).sin() + 1.0).collect::<Vec<_>>(),
        (0..16).map(|i| ((i as f64) * 0.4).cos() + 1.0).collect::<Vec<_>>(),
    ];
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for k in 0..normal {
        rows.push(protos[k % 2].iter().map(|x| x + rng.random_range(-0.1..0.1)).collect::<Vec<_>>());
        truth.push(false);
    }
    for _ in 0..anomalous {
        rows.push((0..16).map(|_| rng.random_range(0.0..1.5)).collect());
        truth.push(true);
    }
    (DataMatrix::from_rows(&rows).unwrap(), truth)
}

fn main() -> tt_anomaly::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (test, truth) = synthetic(&mut rng, 40, 10);
    let (train, _) = synthetic(&mut rng, 30, 0);
    let shape = FactorShape::new(vec![2, 2, 2, 2])?;

    for tau in [0.05, 0.1, 0.2, 0.3] {
        let cfg = DetectorConfig::new(Method::Gcg, shape.clone(), TruncationPolicy::uniform(tau)?);
        let alone = gcg_score(&test, None, &cfg)?;
        let sup = gcg_score(&test, Some(&train), &cfg.clone().with_mode(Mode::Supervised))?;
        println!(
            "tau {tau:.2}  unsupervised AUROC {:.3}  supervised AUROC {:.3}",
            roc_auroc(&alone.scores, &truth)?.auroc,
            roc_auroc(&sup.scores, &truth)?.auroc
        );
    }
    Ok(())
}
