//! Auto-comparative global detection on the bundled digits data: sample 150
//! images of one digit plus 150 others, sweep tau and print the AUROC curve.
//!
//! cargo run --release --example global_auto_digits -- [digit] [input|dataset]

use std::path::Path;

use tt_anomaly::harness::{run_experiment, ExperimentSpec, ScalerFit};
use tt_anomaly::{FactorShape, Method};

fn main() -> tt_anomaly::Result<()> {
    let mut args = std::env::args().skip(1);
    let digit: i64 = args.next().map_or(Ok(0), |a| a.parse()).expect("digit must be an integer");
    let fit = args.next().map_or(Ok(ScalerFit::Input), |a| a.parse())?;

    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/digits.csv");
    let mut spec = ExperimentSpec::new(input, Method::Acg, FactorShape::new(vec![2; 6])?);
    spec.labels = Some("label".into());
    spec.normal_class = Some(digit);
    spec.n_normal = Some(150);
    spec.n_anomalous = Some(150);
    spec.scaler = true;
    spec.scaler_fit = fit;
    spec.seed = 7;

    let report = run_experiment(&spec)?;
    for rec in &report.records {
        let e = rec.evaluation.as_ref().expect("labels given");
        let bar = "#".repeat((e.auroc * 40.0).round() as usize);
        println!("tau {:.3}  auroc {:.3} {bar}", rec.tau, e.auroc);
    }
    let best = report.best().expect("non-empty sweep");
    let e = best.evaluation.as_ref().unwrap();
    println!(
        "digit {digit}, scaler fit {fit:?}: best AUROC {:.3} at tau {:.3} (threshold {:.4}, accuracy {:.3})",
        e.auroc, best.tau, e.threshold, e.accuracy
    );
    Ok(())
}
