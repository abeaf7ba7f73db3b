//! Fault injection, post hoc verification and benchmark curation.

mod curate;
mod schedule;
mod transform;
mod verify;

pub use curate::{
    curate_benchmark, load_benchmark, verification_profile, Benchmark, BenchmarkManifest,
    BenchmarkPlan, CellPlan, CellReport, ManifestEntry, VERIFY_PROFILE_RUNS,
};
pub use schedule::{build_schedule, FaultSpec, ScheduleParams};
pub use transform::{perturbation, step_perturbation};
pub use verify::{verify, verify_with_bound, Direction, VerificationResult};

use crate::model::{FaultLabel, InjectionSchedule, RunError, TrainingRun};
use crate::sim::{generate, SimConfig};

#[derive(Debug, thiserror::Error)]
pub enum InjectError {
    #[error("invalid fault spec: {0}")]
    InvalidSpec(String),
    #[error("schedule has {schedule} steps but the run has {steps}")]
    ScheduleLength { schedule: usize, steps: usize },
    #[error("verification retry budget exhausted for {0}")]
    RetryBudgetExhausted(String),
    #[error("benchmark manifest missing at {0}")]
    ManifestMissing(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Run { path: String, source: RunError },
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Detect(#[from] crate::detect::DetectError),
}

/// Simulates the run for `seed` with the fault of `spec` applied under
/// `schedule`.
///
/// Steps with zero strength keep the healthy laws, so a strength-zero
/// schedule reproduces [`crate::sim::simulate_healthy`] record for record.
pub fn inject(
    config: &SimConfig,
    spec: &FaultSpec,
    schedule: &InjectionSchedule,
    seed: u64,
) -> Result<TrainingRun, InjectError> {
    config.validate()?;
    if schedule.len() != config.steps {
        return Err(InjectError::ScheduleLength {
            schedule: schedule.len(),
            steps: config.steps,
        });
    }
    let records = generate(config, seed, &perturbation(spec.fault_type, schedule, seed));
    TrainingRun::new(
        format!("{}_{}_{seed:016x}", spec.fault_type.id(), spec.regime.id()),
        FaultLabel::of(spec.fault_type),
        Some(spec.regime),
        seed,
        records,
        Some(schedule.clone()),
    )
    .map_err(|e| InjectError::InvalidSpec(e.to_string()))
}
