use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{
    calibrate, compute_threshold, detect, DetectOptions, DEFAULT_HORIZON, DEFAULT_K,
};
use crate::inject::load_benchmark;
use crate::model::{DifficultyRegime, FaultFamily, TrainingRun};

use super::folds::kfold_split;
use super::metrics::{macro_prf, prf};
use super::report::{EvalConfig, EvalReport, EvalTask, ReportRow, RowKind};
use super::{check_horizon, EvalError, DEFAULT_FOLDS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub horizon: usize,
    pub k_coef: f64,
    pub folds: usize,
    pub options: DetectOptions,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            horizon: DEFAULT_HORIZON,
            k_coef: DEFAULT_K,
            folds: DEFAULT_FOLDS,
            options: DetectOptions::default(),
        }
    }
}

/// Outcome of one scored test run.
struct Scored {
    family: FaultFamily,
    regime: Option<DifficultyRegime>,
    flagged: bool,
}

/// Cross-validated detection on a benchmark directory.
pub fn eval_detection(
    dir: &Path,
    params: &DetectionParams,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let bench = load_benchmark(dir)?;
    detection_report(&bench.runs, params, seed)
}

/// Cross-validated detection.
///
/// In every fold the profile and threshold come from the normal runs outside
/// the fold; the fold's fault runs are the positives and its normal runs the
/// negatives. False positives are shared by every family's row.
pub fn detection_report(
    runs: &[TrainingRun],
    params: &DetectionParams,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    check_horizon(runs, params.horizon)?;
    let folds = kfold_split(runs, params.folds, seed)?;
    let fold_of = |r: &TrainingRun| folds.fold_of(r.run_id()).expect("every run is assigned");
    let scored: Vec<Vec<Scored>> = (0..params.folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<TrainingRun> = runs
                .iter()
                .filter(|r| r.label().is_normal() && fold_of(r) != f)
                .cloned()
                .collect();
            let profile = calibrate(&train, params.horizon)?;
            let tau = compute_threshold(
                &profile,
                &train,
                params.k_coef,
                params.horizon,
                params.options,
            )?;
            runs.iter()
                .filter(|r| fold_of(r) == f)
                .map(|r| {
                    let d = detect(r, &profile, tau, params.horizon, params.options)?;
                    Ok(Scored {
                        family: r.label().family(),
                        regime: r.regime(),
                        flagged: d.is_anomalous,
                    })
                })
                .collect::<Result<Vec<_>, EvalError>>()
        })
        .collect::<Result<_, _>>()?;
    let scored: Vec<Scored> = scored.into_iter().flatten().collect();

    let fp = scored
        .iter()
        .filter(|s| s.family == FaultFamily::Normal && s.flagged)
        .count();
    let mut rows = Vec::new();
    for regime in DifficultyRegime::ALL {
        let mut family_metrics = Vec::new();
        for family in FaultFamily::FAULTY {
            let cases: Vec<&Scored> = scored
                .iter()
                .filter(|s| s.regime == Some(regime) && s.family == family)
                .collect();
            if cases.is_empty() {
                continue;
            }
            let tp = cases.iter().filter(|s| s.flagged).count();
            let m = prf(tp, fp, cases.len() - tp);
            family_metrics.push(m);
            rows.push(ReportRow::classification(
                regime,
                RowKind::Family,
                family.id(),
                m,
                cases.len(),
            ));
        }
        if !family_metrics.is_empty() {
            let cases = scored.iter().filter(|s| s.regime == Some(regime)).count();
            rows.push(ReportRow::classification(
                regime,
                RowKind::Macro,
                "macro",
                macro_prf(&family_metrics),
                cases,
            ));
        }
    }
    Ok(EvalReport {
        task: EvalTask::Detection,
        config: EvalConfig {
            horizon: params.horizon,
            seed,
            k_coef: Some(params.k_coef),
            no_calibration: params.options.no_calibration,
            no_invariants: params.options.no_invariants,
            ..EvalConfig::default()
        },
        folds: params.folds,
        rows,
    })
}
