use serde::{Deserialize, Serialize};

use crate::model::{DifficultyRegime, TrainingRun};

use super::detection::{detection_report, DetectionParams};
use super::diagnosis::{diagnosis_report, DiagnosisParams};
use super::{check_horizon, EvalError};

/// Which evaluation a sweep repeats; the horizon in the params is replaced
/// at each point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepTask {
    Detection(DetectionParams),
    Diagnosis(DiagnosisParams),
}

/// Macro F1 in percent per regime at one horizon. A regime without fault
/// runs has no value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub horizon: usize,
    pub easy_f1: Option<f64>,
    pub hard_f1: Option<f64>,
}

pub fn horizon_sweep(
    runs: &[TrainingRun],
    horizons: &[usize],
    task: SweepTask,
    seed: u64,
) -> Result<Vec<SweepRow>, EvalError> {
    for &h in horizons {
        check_horizon(runs, h)?;
    }
    horizons
        .iter()
        .map(|&horizon| {
            let report = match task {
                SweepTask::Detection(p) => {
                    detection_report(runs, &DetectionParams { horizon, ..p }, seed)?
                }
                SweepTask::Diagnosis(p) => {
                    diagnosis_report(runs, &DiagnosisParams { horizon, ..p }, seed)?
                }
            };
            Ok(SweepRow {
                horizon,
                easy_f1: report.macro_f1(DifficultyRegime::Easy),
                hard_f1: report.macro_f1(DifficultyRegime::Hard),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let cell = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.4}"));
    let mut out = String::from("horizon,easy_f1,hard_f1\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.horizon,
            cell(r.easy_f1),
            cell(r.hard_f1)
        ));
    }
    out
}
