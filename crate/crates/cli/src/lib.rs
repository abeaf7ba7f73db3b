//! Command-line driver: benchmark generation, calibration, detection,
//! diagnosis, remediation and the evaluation protocol.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rftfm_core::attribute::{
    attribute, fingerprint_with, fit_attributor, AttributionModel, FingerprintOptions, Granularity,
};
use rftfm_core::detect::{
    calibrate, compute_threshold, detect, extract_deviations_with, score, DetectOptions,
    NormalProfile,
};
use rftfm_core::eval::{
    detection_report, diagnosis_report, horizon_sweep, remediation_report, sweep_csv,
    DetectionParams, DiagnosisParams, EvalReport, Planner, RemediationParams, SweepTask,
};
use rftfm_core::inject::{curate_benchmark, load_benchmark, Benchmark, BenchmarkPlan};
use rftfm_core::remediate::{
    build_state, execute, plan_action_llm, plan_action_random, plan_action_rule, revalidate,
    HttpTransport, PlannerEndpoint, RFTConfig,
};
use rftfm_core::{parse_run, FaultType, TrainingRun};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rftfm",
    version,
    about = "Failure management for reinforcement fine-tuning runs"
)]
struct Cli {
    /// JSON object presetting flags of the chosen subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate, verify and write a labelled benchmark.
    Generate(GenerateArgs),
    /// Calibrate a normal profile on a benchmark's normal runs.
    Calibrate(CalibrateArgs),
    /// Score runs and flag anomalies.
    Detect(DetectArgs),
    /// Attribute faulty runs to a fault type or family.
    Diagnose(DiagnoseArgs),
    /// Plan, apply and revalidate a configuration change for a run.
    Remediate(RemediateArgs),
    /// Run the cross-validated evaluation protocol.
    #[command(subcommand)]
    Evaluate(EvaluateCommand),
    /// Repeat an evaluation over several horizons.
    Sweep(SweepArgs),
    /// Print the tables of the reports saved under a benchmark.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
enum EvaluateCommand {
    Detection(EvalDetectionArgs),
    Diagnosis(EvalDiagnosisArgs),
    Remediation(EvalRemediationArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Easy runs per fault type.
    #[arg(long, default_value_t = 20)]
    easy: usize,
    /// Hard runs per fault type.
    #[arg(long, default_value_t = 28)]
    hard: usize,
    #[arg(long, default_value_t = 11)]
    normals: usize,
}

#[derive(Debug, Args)]
struct DetectFlags {
    #[arg(long, default_value_t = 20)]
    horizon: usize,
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    #[arg(long)]
    no_calibration: bool,
    #[arg(long)]
    no_invariants: bool,
}

impl DetectFlags {
    fn options(&self) -> DetectOptions {
        DetectOptions {
            no_calibration: self.no_calibration,
            no_invariants: self.no_invariants,
        }
    }
}

#[derive(Debug, Args)]
struct FingerprintFlags {
    #[arg(long, value_enum, default_value_t = GranularityArg::Type)]
    granularity: GranularityArg,
    #[arg(long)]
    no_temporal: bool,
    #[arg(long)]
    no_fingerprint: bool,
}

impl FingerprintFlags {
    fn options(&self) -> FingerprintOptions {
        FingerprintOptions {
            no_temporal: self.no_temporal,
            no_fingerprint: self.no_fingerprint,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GranularityArg {
    Family,
    Type,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Family => Granularity::Family,
            GranularityArg::Type => Granularity::Type,
        }
    }
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    bench: PathBuf,
    #[arg(long, default_value_t = 20)]
    horizon: usize,
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    /// Profile destination; defaults to `<bench>/profile.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Run files to score.
    #[arg(long = "run", required = true)]
    runs: Vec<PathBuf>,
    /// Benchmark whose normal runs calibrate the detector.
    #[arg(long, required_unless_present = "profile")]
    bench: Option<PathBuf>,
    /// Saved profile; needs `--threshold`.
    #[arg(long, requires = "threshold")]
    profile: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    detect: DetectFlags,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long = "run", required = true)]
    runs: Vec<PathBuf>,
    /// Benchmark providing the normal profile and the labelled fault runs.
    #[arg(long)]
    bench: PathBuf,
    #[arg(long, default_value_t = 20)]
    horizon: usize,
    #[command(flatten)]
    fingerprint: FingerprintFlags,
    /// Write the fitted model here.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlannerArg {
    Oracle,
    Rule,
    Random,
    Llm,
}

#[derive(Debug, Args)]
struct PlannerFlags {
    #[arg(long, value_enum, default_value_t = PlannerArg::Rule)]
    planner: PlannerArg,
    /// Chat-completion base URL for `--planner llm`.
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent to the endpoint.
    #[arg(long, default_value = "gpt-4o-mini")]
    model_name: String,
}

impl PlannerFlags {
    fn endpoint(&self) -> Result<Option<PlannerEndpoint>, CliError> {
        if self.planner != PlannerArg::Llm {
            return Ok(None);
        }
        let url = self
            .endpoint
            .as_deref()
            .ok_or_else(|| CliError::Usage("--planner llm needs --endpoint".into()))?;
        Ok(Some(PlannerEndpoint::from_env(
            url,
            self.model_name.clone(),
        )))
    }
}

#[derive(Debug, Args)]
struct RemediateArgs {
    #[arg(long = "run")]
    run: PathBuf,
    #[arg(long)]
    bench: PathBuf,
    #[arg(long, default_value_t = 20)]
    horizon: usize,
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    planner: PlannerFlags,
}

#[derive(Debug, Args)]
struct EvalDetectionArgs {
    #[arg(long)]
    bench: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[command(flatten)]
    detect: DetectFlags,
}

#[derive(Debug, Args)]
struct EvalDiagnosisArgs {
    #[arg(long)]
    bench: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 20)]
    horizon: usize,
    #[command(flatten)]
    fingerprint: FingerprintFlags,
    /// Attribute only runs the detector flags.
    #[arg(long)]
    pipeline: bool,
    #[arg(long, default_value_t = 2.0)]
    k: f64,
}

#[derive(Debug, Args)]
struct EvalRemediationArgs {
    #[arg(long)]
    bench: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    horizon: usize,
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    /// Sampled runs per family.
    #[arg(long, default_value_t = 15)]
    per_family: usize,
    #[command(flatten)]
    planner: PlannerFlags,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepTaskArg {
    Detection,
    Diagnosis,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    bench: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "6,8,10,12,14,16,18,20")]
    horizons: Vec<usize>,
    #[arg(long, value_enum, default_value_t = SweepTaskArg::Detection)]
    task: SweepTaskArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    #[arg(long, value_enum, default_value_t = GranularityArg::Type)]
    granularity: GranularityArg,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    bench: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

macro_rules! data_err {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}

data_err!(
    rftfm_core::inject::InjectError,
    rftfm_core::detect::DetectError,
    rftfm_core::attribute::AttributeError,
    rftfm_core::remediate::RemediateError,
    rftfm_core::eval::EvalError,
    std::io::Error
);

impl From<rftfm_core::remediate::PlannerError> for CliError {
    fn from(e: rftfm_core::remediate::PlannerError) -> Self {
        let fallback = serde_json::to_string(e.fallback()).unwrap_or_default();
        CliError::Data(format!("{e}; rule fallback would be {fallback}"))
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn cli_main<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let args = match apply_config(args) {
        Ok(a) => a,
        Err(e) => return report_error(e, err),
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(e, err),
    }
}

fn report_error(e: CliError, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {e}");
    match e {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::Data(_) => EXIT_DATA,
    }
}

/// Expands `--config FILE` into flags placed right after the subcommand
/// names. Flags given on the command line win.
fn apply_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| CliError::Usage("--config needs a file".into()))?,
            );
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text =
        fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
    let obj: serde_json::Map<String, Value> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
    let given = |flag: &str| {
        rest.iter()
            .any(|a| a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut preset = Vec::new();
    for (key, value) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        if given(&flag) {
            continue;
        }
        match value {
            Value::Bool(true) => preset.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => preset.extend([flag, s]),
            Value::Number(n) => preset.extend([flag, n.to_string()]),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
                    .collect();
                preset.extend([flag, parts.join(",")]);
            }
            Value::Object(_) => {
                return Err(CliError::Usage(format!(
                    "config key {key:?} has an object value"
                )))
            }
        }
    }
    let split = rest
        .iter()
        .skip(1)
        .position(|a| a.starts_with('-'))
        .map_or(rest.len(), |i| i + 1);
    let tail = rest.split_off(split);
    rest.extend(preset);
    rest.extend(tail);
    Ok(rest)
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => generate(a, out),
        Command::Calibrate(a) => calibrate_cmd(a, out),
        Command::Detect(a) => detect_cmd(a, out),
        Command::Diagnose(a) => diagnose_cmd(a, out),
        Command::Remediate(a) => remediate_cmd(a, out),
        Command::Evaluate(EvaluateCommand::Detection(a)) => eval_detection_cmd(a, out),
        Command::Evaluate(EvaluateCommand::Diagnosis(a)) => eval_diagnosis_cmd(a, out),
        Command::Evaluate(EvaluateCommand::Remediation(a)) => eval_remediation_cmd(a, out),
        Command::Sweep(a) => sweep_cmd(a, out),
        Command::Report(a) => report_cmd(a, out),
    }
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let plan = BenchmarkPlan::uniform(a.seed, a.easy, a.hard, a.normals);
    let manifest = curate_benchmark(&plan, &a.out)?;
    let summary = json!({
        "out": a.out.display().to_string(),
        "runs": manifest.runs.len(),
        "easy": manifest.fault_count(rftfm_core::DifficultyRegime::Easy),
        "hard": manifest.fault_count(rftfm_core::DifficultyRegime::Hard),
        "normal": manifest.normal_count,
        "rejected": manifest.cells.iter().map(|c| c.rejected).sum::<usize>(),
    });
    writeln!(out, "{summary}")?;
    Ok(())
}

fn load(dir: &Path) -> Result<Benchmark, CliError> {
    Ok(load_benchmark(dir)?)
}

fn normals(bench: &Benchmark) -> Vec<TrainingRun> {
    bench.normals().into_iter().cloned().collect()
}

fn read_run(path: &Path) -> Result<TrainingRun, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_run(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn calibrate_cmd(a: CalibrateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bench = load(&a.bench)?;
    let normals = normals(&bench);
    let profile = calibrate(&normals, a.horizon)?;
    let tau = compute_threshold(&profile, &normals, a.k, a.horizon, DetectOptions::default())?;
    let path = a.out.unwrap_or_else(|| a.bench.join("profile.json"));
    profile.save(&path)?;
    let summary = json!({
        "profile": path.display().to_string(),
        "normal_runs": profile.run_count,
        "horizon": a.horizon,
        "k": a.k,
        "threshold": tau,
    });
    writeln!(out, "{summary}")?;
    Ok(())
}

fn detect_cmd(a: DetectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = a.detect.options();
    let h = a.detect.horizon;
    let (profile, tau) = match (&a.profile, &a.bench) {
        (Some(p), _) => {
            let profile = NormalProfile::load(p)?;
            (
                profile,
                a.threshold.expect("clap requires threshold with profile"),
            )
        }
        (None, Some(b)) => {
            let normals = normals(&load(b)?);
            let profile = calibrate(&normals, h)?;
            let tau = match a.threshold {
                Some(t) => t,
                None => compute_threshold(&profile, &normals, a.detect.k, h, opts)?,
            };
            (profile, tau)
        }
        (None, None) => unreachable!("clap requires bench or profile"),
    };
    for path in &a.runs {
        let run = read_run(path)?;
        let d = detect(&run, &profile, tau, h, opts)?;
        let line = json!({
            "run_id": run.run_id(),
            "severity": d.severity.overall,
            "per_invariant": d.severity.per_invariant,
            "threshold": d.threshold,
            "is_anomalous": d.is_anomalous,
        });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn fit_on_bench(
    bench: &Benchmark,
    profile: &NormalProfile,
    horizon: usize,
    granularity: Granularity,
    opts: FingerprintOptions,
) -> Result<AttributionModel, CliError> {
    let labeled = bench
        .runs
        .iter()
        .filter(|r| !r.label().is_normal())
        .map(|r| Ok((fingerprint_with(r, profile, horizon, opts)?, r.label())))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(fit_attributor(&labeled, granularity)?)
}

fn diagnose_cmd(a: DiagnoseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bench = load(&a.bench)?;
    let profile = calibrate(&normals(&bench), a.horizon)?;
    let opts = a.fingerprint.options();
    let model = fit_on_bench(
        &bench,
        &profile,
        a.horizon,
        a.fingerprint.granularity.into(),
        opts,
    )?;
    if let Some(p) = &a.save_model {
        model.save(p)?;
    }
    for path in &a.runs {
        let run = read_run(path)?;
        let predicted = attribute(&model, &fingerprint_with(&run, &profile, a.horizon, opts)?)?;
        let line = json!({
            "run_id": run.run_id(),
            "attribution": predicted.id(),
            "family": predicted.family().id(),
        });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn remediate_cmd(a: RemediateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let endpoint = a.planner.endpoint()?;
    let bench = load(&a.bench)?;
    let normals = normals(&bench);
    let h = a.horizon;
    let profile = calibrate(&normals, h)?;
    let tau = compute_threshold(&profile, &normals, a.k, h, DetectOptions::default())?;
    let run = read_run(&a.run)?;
    let dev = extract_deviations_with(&run, &profile, h, DetectOptions::default())?;
    let sev = score(&dev);
    if sev.overall <= tau {
        let line = json!({"run_id": run.run_id(), "severity": sev.overall, "threshold": tau, "is_anomalous": false});
        writeln!(out, "{line}")?;
        return Ok(());
    }
    let label = match a.planner.planner {
        PlannerArg::Oracle => {
            if run.label().is_normal() {
                return Err(CliError::Data(format!(
                    "{} carries no fault label for the oracle",
                    run.run_id()
                )));
            }
            run.label().fault_type()
        }
        _ => {
            let model = fit_on_bench(
                &bench,
                &profile,
                h,
                Granularity::Type,
                FingerprintOptions::default(),
            )?;
            match attribute(
                &model,
                &fingerprint_with(&run, &profile, h, FingerprintOptions::default())?,
            )? {
                rftfm_core::attribute::Attribution::Type(t) => t,
                rftfm_core::attribute::Attribution::Family(f) => {
                    f.types().next().unwrap_or(FaultType::Normal)
                }
            }
        }
    };
    let base = RFTConfig::baseline();
    let state = build_state(&run, label, &dev, &sev, &base)?;
    let mut fallback = false;
    let action = match (a.planner.planner, endpoint) {
        (PlannerArg::Random, _) => {
            plan_action_random(rftfm_core::sim::derive_seed(a.seed, &[run.seed()]))
        }
        (PlannerArg::Llm, Some(ep)) => {
            let plan = plan_action_llm(&HttpTransport, &ep, &state)?;
            fallback = plan.fallback;
            plan.action
        }
        _ => plan_action_rule(&state),
    };
    let updated = execute(&base, &action)?;
    let outcome = revalidate(&run, &base, &updated, &action, &profile, h, run.seed())?;
    let line = json!({
        "run_id": run.run_id(),
        "attributed": label.id(),
        "threshold": tau,
        "is_anomalous": true,
        "planner_fallback": fallback,
        "outcome": outcome,
    });
    writeln!(out, "{line}")?;
    Ok(())
}

/// Writes `<bench>/reports/<name>.json` and `.txt` and prints both.
fn emit_report(
    bench: &Path,
    name: &str,
    report: &EvalReport,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let dir = bench.join("reports");
    fs::create_dir_all(&dir)?;
    let json = report.to_json();
    let table = report.to_table();
    fs::write(dir.join(format!("{name}.json")), &json)?;
    fs::write(dir.join(format!("{name}.txt")), &table)?;
    write!(out, "{json}{table}")?;
    Ok(())
}

fn report_name(task: &str, flags: &[(bool, &str)]) -> String {
    let mut name = task.to_string();
    for (on, f) in flags {
        if *on {
            name.push('_');
            name.push_str(f);
        }
    }
    name
}

fn eval_detection_cmd(a: EvalDetectionArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bench = load(&a.bench)?;
    let params = DetectionParams {
        horizon: a.detect.horizon,
        k_coef: a.detect.k,
        folds: a.folds,
        options: a.detect.options(),
    };
    let report = detection_report(&bench.runs, &params, a.seed)?;
    let name = report_name(
        "detection",
        &[
            (a.detect.no_calibration, "no-calibration"),
            (a.detect.no_invariants, "no-invariants"),
        ],
    );
    emit_report(&a.bench, &name, &report, out)
}

fn eval_diagnosis_cmd(a: EvalDiagnosisArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bench = load(&a.bench)?;
    let granularity: Granularity = a.fingerprint.granularity.into();
    let params = DiagnosisParams {
        horizon: a.horizon,
        granularity,
        folds: a.folds,
        options: a.fingerprint.options(),
        pipeline: a.pipeline,
        k_coef: a.k,
    };
    let report = diagnosis_report(&bench.runs, &params, a.seed)?;
    let task = match granularity {
        Granularity::Type => "diagnosis",
        Granularity::Family => "diagnosis_family",
    };
    let name = report_name(
        task,
        &[
            (a.fingerprint.no_temporal, "no-temporal"),
            (a.fingerprint.no_fingerprint, "no-fingerprint"),
            (a.pipeline, "pipeline"),
        ],
    );
    emit_report(&a.bench, &name, &report, out)
}

fn eval_remediation_cmd(a: EvalRemediationArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let endpoint = a.planner.endpoint()?;
    let bench = load(&a.bench)?;
    let params = RemediationParams {
        horizon: a.horizon,
        k_coef: a.k,
        per_family: a.per_family,
    };
    let planner = match (a.planner.planner, &endpoint) {
        (PlannerArg::Oracle, _) => Planner::Oracle,
        (PlannerArg::Rule, _) => Planner::Rule,
        (PlannerArg::Random, _) => Planner::Random,
        (PlannerArg::Llm, Some(ep)) => Planner::Llm {
            transport: &HttpTransport,
            endpoint: ep,
        },
        (PlannerArg::Llm, None) => unreachable!("endpoint checked above"),
    };
    let result = remediation_report(&bench.runs, planner, &params, a.seed)?;
    let name = format!("remediation_{}", planner.name());
    emit_report(&a.bench, &name, &result.report, out)?;
    let cases = serde_json::to_string_pretty(&result.outcomes)
        .map_err(|e| CliError::Data(e.to_string()))?;
    fs::write(
        a.bench.join("reports").join(format!("{name}_cases.json")),
        cases + "\n",
    )?;
    Ok(())
}

fn sweep_cmd(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bench = load(&a.bench)?;
    let (task, label) = match a.task {
        SweepTaskArg::Detection => (
            SweepTask::Detection(DetectionParams {
                k_coef: a.k,
                ..DetectionParams::default()
            }),
            "detection",
        ),
        SweepTaskArg::Diagnosis => (
            SweepTask::Diagnosis(DiagnosisParams {
                granularity: a.granularity.into(),
                ..DiagnosisParams::default()
            }),
            "diagnosis",
        ),
    };
    let rows = horizon_sweep(&bench.runs, &a.horizons, task, a.seed)?;
    let csv = sweep_csv(&rows);
    let dir = a.bench.join("reports");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(format!("sweep_{label}.csv")), &csv)?;
    write!(out, "{csv}")?;
    Ok(())
}

fn report_cmd(a: ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dir = a.bench.join("reports");
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut shown = 0;
    for p in paths {
        let text = fs::read_to_string(&p)?;
        // case files and other JSON are skipped
        let Ok(report) = serde_json::from_str::<EvalReport>(&text) else {
            continue;
        };
        let name = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        writeln!(out, "== {name}")?;
        write!(out, "{}", report.to_table())?;
        shown += 1;
    }
    if shown == 0 {
        return Err(CliError::Data(format!(
            "no reports under {}",
            dir.display()
        )));
    }
    Ok(())
}
