use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tt-anomaly"))
        .args(args)
        .output()
        .unwrap()
}

fn digits() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/digits.csv")
        .to_string_lossy()
        .into_owned()
}

const SAMPLE: [&str; 12] = [
    "--labels", "label", "--shape", "2,2,2,2,2,2", "--normal-class", "1", "--n-normal", "30",
    "--n-anomalous", "30", "--seed", "9",
];

#[test]
fn tabular_sweep_to_stdout() {
    let input = digits();
    let mut args = vec!["--input", input.as_str(), "--method", "acg", "--tau", "0.1,0.2", "--tau", "0.3"];
    args.extend(SAMPLE);
    args.extend(["--scaler", "on", "--format", "tabular"]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn structured_report_to_file_with_scores() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let input = digits();
    let out_arg = path.to_string_lossy().into_owned();
    let mut args = vec!["--input", input.as_str(), "--method", "gcl", "--tau", "0.2", "--emit-scores"];
    args.extend(SAMPLE);
    args.extend(["--out", out_arg.as_str()]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["records"][0]["scores"].as_array().unwrap().len(), 60);
}

#[test]
fn exit_codes() {
    let input = digits();
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--input", &input, "--method", "xyz", "--shape", "8,8"]).status.code(), Some(1));
    assert_eq!(
        run(&["--input", &input, "--method", "acg", "--shape", "8,8", "--tau", "1.5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["--input", "/nonexistent.csv", "--method", "acg", "--shape", "8,8"]).status.code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let zeros = dir.path().join("zeros.csv");
    fs::write(&zeros, "a,b,c,d\n0,0,0,0\n0,0,0,0\n").unwrap();
    let z = zeros.to_string_lossy().into_owned();
    assert_eq!(
        run(&["--input", &z, "--method", "acg", "--shape", "2,2", "--tau", "0.1"]).status.code(),
        Some(3)
    );
}
