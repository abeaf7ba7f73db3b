//! Cross-validated evaluation of detection, diagnosis and remediation, and
//! horizon sweeps.

mod detection;
mod diagnosis;
mod folds;
mod metrics;
mod remediation;
mod report;
mod sweep;

pub use detection::{detection_report, eval_detection, DetectionParams};
pub use diagnosis::{diagnosis_report, eval_diagnosis, DiagnosisParams};
pub use folds::{kfold_split, kfold_split_refs, FoldAssignment};
pub use metrics::{macro_prf, per_class_prf, prf, Prf};
pub use remediation::{
    eval_remediation, remediation_report, Planner, RemediationParams, RemediationReport,
    DEFAULT_PER_FAMILY,
};
pub use report::{EvalConfig, EvalReport, EvalTask, ReportRow, RowKind};
pub use sweep::{horizon_sweep, sweep_csv, SweepRow, SweepTask};

use crate::attribute::AttributeError;
use crate::detect::DetectError;
use crate::inject::InjectError;
use crate::model::TrainingRun;
use crate::remediate::{PlannerError, RemediateError};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("cannot split into {0} folds; need at least 2")]
    KTooLarge(usize),
    #[error("horizon {horizon} exceeds the shortest run ({max} steps)")]
    HorizonTooLarge { horizon: usize, max: usize },
    #[error("empty class: {0}")]
    EmptyClass(String),
    #[error("no remediation cases")]
    NoCases,
    #[error(transparent)]
    Inject(#[from] InjectError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Attribute(#[from] AttributeError),
    #[error(transparent)]
    Remediate(#[from] RemediateError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
}

/// Every run must cover the horizon.
pub(crate) fn check_horizon(runs: &[TrainingRun], horizon: usize) -> Result<(), EvalError> {
    let max = runs.iter().map(|r| r.len()).min().unwrap_or(0);
    if horizon > max {
        return Err(EvalError::HorizonTooLarge { horizon, max });
    }
    Ok(())
}
