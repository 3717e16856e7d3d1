//! Run a sweep through the harness and write both report formats.
//!
//! cargo run --release --example tau_sweep_report -- [out-dir]

use std::path::{Path, PathBuf};

use tt_anomaly::harness::{emit_report, read_structured_report, run_experiment, tau_grid, ExperimentSpec, ReportFormat};
use tt_anomaly::{FactorShape, Method};

fn main() -> tt_anomaly::Result<()> {
    let out: PathBuf = std::env::args().nth(1).map_or_else(std::env::temp_dir, PathBuf::from);
    let mut spec = ExperimentSpec::new(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data/digits.csv"),
        Method::Gcg,
        FactorShape::new(vec![4, 4, 4])?,
    );
    spec.labels = Some("label".into());
    spec.normal_class = Some(4);
    spec.n_normal = Some(100);
    spec.n_anomalous = Some(100);
    spec.taus = tau_grid(11, 0.5);
    spec.emit_scores = true;

    let report = run_experiment(&spec)?;
    let json = out.join("sweep.json");
    let csv = out.join("sweep.csv");
    emit_report(&report, ReportFormat::Structured, Some(&json))?;
    emit_report(&report, ReportFormat::Tabular, Some(&csv))?;

    let back = read_structured_report(&json)?;
    assert_eq!(back, report);
    println!("wrote {} and {}", json.display(), csv.display());
    print!("{}", std::fs::read_to_string(&csv).map_err(|e| tt_anomaly::Error::Format(e.to_string()))?);
    Ok(())
}
