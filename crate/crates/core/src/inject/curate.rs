use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{calibrate, NormalProfile};
use crate::model::{
    parse_run, serialize_run, DifficultyRegime, FaultLabel, FaultType, TrainingRun,
};
use crate::sim::{derive_seed, simulate_healthy, SimConfig};

use super::{build_schedule, inject, verify, FaultSpec, InjectError};

/// Healthy runs used to calibrate the verifier's reference profile.
pub const VERIFY_PROFILE_RUNS: usize = 100;
/// Attempts per retained run before a cell gives up.
pub const RETRY_FACTOR: usize = 5;

const NORMAL_TAG: u64 = 1 << 40;
const VERIFY_TAG: u64 = 1 << 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellPlan {
    pub fault_type: FaultType,
    pub regime: DifficultyRegime,
    pub count: usize,
}

/// What to generate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub seed: u64,
    pub cells: Vec<CellPlan>,
    pub normal_count: usize,
}

impl BenchmarkPlan {
    /// Twenty easy and twenty-eight hard runs per fault type plus eleven
    /// healthy runs: 779 in total.
    pub fn default_plan(seed: u64) -> Self {
        Self::uniform(seed, 20, 28, 11)
    }

    pub fn uniform(seed: u64, easy: usize, hard: usize, normal_count: usize) -> Self {
        let mut cells = Vec::new();
        for (regime, count) in [
            (DifficultyRegime::Easy, easy),
            (DifficultyRegime::Hard, hard),
        ] {
            for fault_type in FaultType::ALL {
                cells.push(CellPlan {
                    fault_type,
                    regime,
                    count,
                });
            }
        }
        BenchmarkPlan {
            seed,
            cells,
            normal_count,
        }
    }

    pub fn total_runs(&self) -> usize {
        self.cells.iter().map(|c| c.count).sum::<usize>() + self.normal_count
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellReport {
    pub fault_type: FaultType,
    pub regime: DifficultyRegime,
    pub planned: usize,
    pub attempted: usize,
    pub retained: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the benchmark root.
    pub path: String,
    pub run_id: String,
    pub label_type: FaultType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<DifficultyRegime>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub tool_version: String,
    pub plan: BenchmarkPlan,
    pub cells: Vec<CellReport>,
    pub normal_count: usize,
    pub runs: Vec<ManifestEntry>,
}

impl BenchmarkManifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn fault_count(&self, regime: DifficultyRegime) -> usize {
        self.cells
            .iter()
            .filter(|c| c.regime == regime)
            .map(|c| c.retained)
            .sum()
    }
}

/// A loaded benchmark.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub manifest: BenchmarkManifest,
    pub runs: Vec<TrainingRun>,
}

impl Benchmark {
    pub fn normals(&self) -> Vec<&TrainingRun> {
        self.runs.iter().filter(|r| r.label().is_normal()).collect()
    }

    pub fn faulty(&self, regime: DifficultyRegime) -> Vec<&TrainingRun> {
        self.runs
            .iter()
            .filter(|r| r.regime() == Some(regime))
            .collect()
    }
}

fn run_path(regime: Option<DifficultyRegime>, fault: FaultType, run_id: &str) -> String {
    match regime {
        Some(r) => format!("runs/{}/{}/{run_id}.jsonl", r.id(), fault.id()),
        None => format!("normal/{run_id}.jsonl"),
    }
}

/// Healthy reference runs the verifier is calibrated on, long enough for
/// either regime.
pub fn verification_profile(seed: u64) -> Result<NormalProfile, InjectError> {
    let steps = DifficultyRegime::ALL
        .iter()
        .map(|r| r.steps())
        .max()
        .unwrap_or(40);
    let cfg = SimConfig::with_steps(steps);
    let runs: Vec<TrainingRun> = (0..VERIFY_PROFILE_RUNS as u64)
        .map(|i| simulate_healthy(&cfg, derive_seed(seed, &[VERIFY_TAG, i])))
        .collect();
    Ok(calibrate(&runs, DifficultyRegime::Easy.steps())?)
}

fn curate_cell(
    plan_seed: u64,
    cell_index: usize,
    cell: &CellPlan,
    profile: &NormalProfile,
) -> Result<(CellReport, Vec<TrainingRun>), InjectError> {
    let steps = cell.regime.steps();
    let cfg = SimConfig::with_steps(steps);
    let mut kept = Vec::with_capacity(cell.count);
    let mut attempted = 0;
    while kept.len() < cell.count {
        if attempted >= RETRY_FACTOR * cell.count {
            return Err(InjectError::RetryBudgetExhausted(format!(
                "{} {} ({} of {} after {attempted} attempts)",
                cell.fault_type,
                cell.regime,
                kept.len(),
                cell.count
            )));
        }
        let seed = derive_seed(plan_seed, &[cell_index as u64, attempted as u64]);
        attempted += 1;
        let spec = FaultSpec::realize(cell.fault_type, cell.regime, seed);
        let schedule = build_schedule(&spec, steps, seed)?;
        let run = inject(&cfg, &spec, &schedule, seed)?;
        if verify(&run, &spec, profile)?.passed {
            let id = format!(
                "{}_{}_{:03}",
                cell.fault_type.id(),
                cell.regime.id(),
                kept.len()
            );
            kept.push(run.with_id(id));
        }
    }
    let report = CellReport {
        fault_type: cell.fault_type,
        regime: cell.regime,
        planned: cell.count,
        attempted,
        retained: kept.len(),
        rejected: attempted - kept.len(),
    };
    Ok((report, kept))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), InjectError> {
    let io = |source| InjectError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}

/// Generates, verifies and writes the benchmark described by `plan` under
/// `out_dir`. Output is a pure function of the plan.
pub fn curate_benchmark(
    plan: &BenchmarkPlan,
    out_dir: &Path,
) -> Result<BenchmarkManifest, InjectError> {
    let profile = verification_profile(plan.seed)?;
    let results: Vec<(CellReport, Vec<TrainingRun>)> = plan
        .cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| curate_cell(plan.seed, i, cell, &profile))
        .collect::<Result<_, _>>()?;

    let normal_cfg = SimConfig::with_steps(DifficultyRegime::Easy.steps());
    let normals: Vec<TrainingRun> = (0..plan.normal_count)
        .map(|i| {
            simulate_healthy(&normal_cfg, derive_seed(plan.seed, &[NORMAL_TAG, i as u64]))
                .with_id(format!("normal_{i:03}"))
        })
        .collect();

    let mut entries = Vec::with_capacity(plan.total_runs());
    let all_runs = results
        .iter()
        .flat_map(|(_, runs)| runs.iter())
        .chain(normals.iter());
    let files: Vec<(String, &TrainingRun)> = all_runs
        .map(|run| {
            let path = run_path(run.regime(), run.label().fault_type(), run.run_id());
            entries.push(ManifestEntry {
                path: path.clone(),
                run_id: run.run_id().to_string(),
                label_type: run.label().fault_type(),
                regime: run.regime(),
            });
            (path, run)
        })
        .collect();
    files
        .par_iter()
        .try_for_each(|(path, run)| write_file(&out_dir.join(path), &serialize_run(run)))?;

    let manifest = BenchmarkManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        plan: plan.clone(),
        cells: results.into_iter().map(|(r, _)| r).collect(),
        normal_count: normals.len(),
        runs: entries,
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| InjectError::Manifest(e.to_string()))?;
    write_file(
        &out_dir.join(BenchmarkManifest::FILE),
        (text + "\n").as_bytes(),
    )?;
    Ok(manifest)
}

/// Reads a benchmark written by [`curate_benchmark`].
pub fn load_benchmark(dir: &Path) -> Result<Benchmark, InjectError> {
    let manifest_path: PathBuf = dir.join(BenchmarkManifest::FILE);
    if !manifest_path.is_file() {
        return Err(InjectError::ManifestMissing(
            manifest_path.display().to_string(),
        ));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|source| InjectError::Io {
        path: manifest_path.display().to_string(),
        source,
    })?;
    let manifest: BenchmarkManifest =
        serde_json::from_str(&text).map_err(|e| InjectError::Manifest(e.to_string()))?;
    let runs = manifest
        .runs
        .par_iter()
        .map(|e| {
            let path = dir.join(&e.path);
            let bytes = fs::read(&path).map_err(|source| InjectError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let run = parse_run(&bytes).map_err(|source| InjectError::Run {
                path: path.display().to_string(),
                source,
            })?;
            if run.label() != FaultLabel::of(e.label_type) || run.run_id() != e.run_id {
                return Err(InjectError::Manifest(format!(
                    "{} disagrees with its manifest entry",
                    e.path
                )));
            }
            Ok(run)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Benchmark { manifest, runs })
}
