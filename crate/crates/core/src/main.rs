use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use tt_anomaly::harness::{default_tau_grid, emit_report, run_experiment, ExperimentSpec, ReportFormat, ScalerFit};
use tt_anomaly::{Error, FactorShape, Method, Mode};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Acg,
    Gcg,
    Acl,
    Gcl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Structured,
    Tabular,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScalerFitArg {
    Input,
    Dataset,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Unsupervised,
    SemiSupervised,
    Supervised,
}

/// Tensor-train compression anomaly detection over a sweep of tau values.
#[derive(Debug, Parser)]
#[command(name = "tt-anomaly", version)]
struct Cli {
    /// Numeric CSV dataset.
    #[arg(long)]
    input: PathBuf,
    /// Label column of --input (name or 0-based index), or a file with one
    /// integer label per line.
    #[arg(long)]
    labels: Option<String>,
    /// CSV of normal training rows (same columns as --input).
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Comma-separated factors whose product covers the feature count.
    #[arg(long)]
    shape: FactorShape,
    /// Truncation thresholds; repeatable or comma-separated. Defaults to 50
    /// evenly spaced values in [0, 0.5].
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    #[arg(long, value_enum, default_value = "off")]
    scaler: Switch,
    /// Rows the scaler is fitted on: the compressor input, or the whole
    /// --input file before sampling.
    #[arg(long, value_enum, default_value = "input")]
    scaler_fit: ScalerFitArg,
    /// Label of the normal class; every other label is anomalous.
    #[arg(long, allow_negative_numbers = true)]
    normal_class: Option<i64>,
    #[arg(long)]
    n_normal: Option<usize>,
    #[arg(long)]
    n_anomalous: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    format: FormatArg,
    /// Include per-row decision values in every record.
    #[arg(long)]
    emit_scores: bool,
    /// The input files have no header row.
    #[arg(long)]
    no_header: bool,
    /// Overrides the mode inferred from the presence of --train.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

impl Cli {
    fn into_spec(self) -> ExperimentSpec {
        let method = match self.method {
            MethodArg::Acg => Method::Acg,
            MethodArg::Gcg => Method::Gcg,
            MethodArg::Acl => Method::Acl,
            MethodArg::Gcl => Method::Gcl,
        };
        let mut spec = ExperimentSpec::new(self.input, method, self.shape);
        spec.has_header = !self.no_header;
        spec.labels = self.labels;
        spec.train = self.train;
        spec.taus = if self.tau.is_empty() {
            default_tau_grid()
        } else {
            self.tau
        };
        spec.scaler = matches!(self.scaler, Switch::On);
        spec.scaler_fit = match self.scaler_fit {
            ScalerFitArg::Input => ScalerFit::Input,
            ScalerFitArg::Dataset => ScalerFit::Dataset,
        };
        spec.mode = self.mode.map(|m| match m {
            ModeArg::Unsupervised => Mode::Unsupervised,
            ModeArg::SemiSupervised => Mode::SemiSupervised,
            ModeArg::Supervised => Mode::Supervised,
        });
        spec.normal_class = self.normal_class;
        spec.n_normal = self.n_normal;
        spec.n_anomalous = self.n_anomalous;
        spec.seed = self.seed;
        spec.emit_scores = self.emit_scores;
        spec.out = self.out;
        spec.format = match self.format {
            FormatArg::Structured => ReportFormat::Structured,
            FormatArg::Tabular => ReportFormat::Tabular,
        };
        spec
    }
}

fn run(spec: &ExperimentSpec) -> Result<(), Error> {
    let report = run_experiment(spec)?;
    emit_report(&report, spec.format, spec.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let spec = cli.into_spec();
    match run(&spec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
