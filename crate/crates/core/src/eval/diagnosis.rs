use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribute::{
    attribute, fingerprint_with, fit_attributor, Attribution, FingerprintOptions, Granularity,
};
use crate::detect::{
    calibrate, compute_threshold, detect, DetectOptions, DEFAULT_HORIZON, DEFAULT_K,
};
use crate::inject::load_benchmark;
use crate::model::{DifficultyRegime, FaultFamily, TrainingRun};

use super::folds::kfold_split_refs;
use super::metrics::{macro_prf, per_class_prf, Prf};
use super::report::{EvalConfig, EvalReport, EvalTask, ReportRow, RowKind};
use super::{check_horizon, EvalError, DEFAULT_FOLDS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisParams {
    pub horizon: usize,
    pub granularity: Granularity,
    pub folds: usize,
    pub options: FingerprintOptions,
    /// Only attribute runs the detector flags; missed runs count as misses.
    pub pipeline: bool,
    /// Threshold coefficient for the pipeline's detector.
    pub k_coef: f64,
}

impl Default for DiagnosisParams {
    fn default() -> Self {
        DiagnosisParams {
            horizon: DEFAULT_HORIZON,
            granularity: Granularity::Type,
            folds: DEFAULT_FOLDS,
            options: FingerprintOptions::default(),
            pipeline: false,
            k_coef: DEFAULT_K,
        }
    }
}

pub fn eval_diagnosis(
    dir: &Path,
    params: &DiagnosisParams,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let bench = load_benchmark(dir)?;
    diagnosis_report(&bench.runs, params, seed)
}

/// Cross-validated attribution of the fault runs, one regime at a time.
///
/// The profile is calibrated on every normal run; the fault runs are split
/// into stratified folds and each fold is attributed by a model fitted on
/// the others. Family rows at type granularity average the family's types.
pub fn diagnosis_report(
    runs: &[TrainingRun],
    params: &DiagnosisParams,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    check_horizon(runs, params.horizon)?;
    let normals: Vec<TrainingRun> = runs
        .iter()
        .filter(|r| r.label().is_normal())
        .cloned()
        .collect();
    let profile = calibrate(&normals, params.horizon)?;
    let tau = if params.pipeline {
        Some(compute_threshold(
            &profile,
            &normals,
            params.k_coef,
            params.horizon,
            DetectOptions::default(),
        )?)
    } else {
        None
    };
    let gran = params.granularity;
    let mut rows = Vec::new();
    let mut any = false;
    for regime in DifficultyRegime::ALL {
        let faulty: Vec<&TrainingRun> =
            runs.iter().filter(|r| r.regime() == Some(regime)).collect();
        if faulty.is_empty() {
            continue;
        }
        any = true;
        let fps = faulty
            .par_iter()
            .map(|r| fingerprint_with(r, &profile, params.horizon, params.options))
            .collect::<Result<Vec<_>, _>>()?;
        let flagged: Vec<bool> = match tau {
            Some(t) => faulty
                .par_iter()
                .map(|r| {
                    detect(r, &profile, t, params.horizon, DetectOptions::default())
                        .map(|d| d.is_anomalous)
                })
                .collect::<Result<_, _>>()?,
            None => vec![true; faulty.len()],
        };
        let folds = kfold_split_refs(&faulty, params.folds, seed)?;
        let fold: Vec<usize> = faulty
            .iter()
            .map(|r| folds.fold_of(r.run_id()).expect("assigned"))
            .collect();
        let mut predictions: Vec<Option<Attribution>> = vec![None; faulty.len()];
        for f in 0..params.folds {
            let train: Vec<_> = (0..faulty.len())
                .filter(|&i| fold[i] != f)
                .map(|i| (fps[i].clone(), faulty[i].label()))
                .collect();
            let test: Vec<usize> = (0..faulty.len())
                .filter(|&i| fold[i] == f && flagged[i])
                .collect();
            if test.is_empty() {
                continue;
            }
            let model = fit_attributor(&train, gran)?;
            for i in test {
                predictions[i] = Some(attribute(&model, &fps[i])?);
            }
        }
        let pairs: Vec<(Attribution, Option<Attribution>)> = faulty
            .iter()
            .zip(&predictions)
            .map(|(r, p)| (Attribution::of(r.label(), gran), *p))
            .collect();
        let mut classes: Vec<Attribution> = pairs.iter().map(|(t, _)| *t).collect();
        classes.sort();
        classes.dedup();
        let per_class = per_class_prf(&pairs, &classes);
        let support = |c: Attribution| pairs.iter().filter(|(t, _)| *t == c).count();
        for family in FaultFamily::FAULTY {
            let members: Vec<Prf> = per_class
                .iter()
                .filter(|(c, _)| c.family() == family)
                .map(|(_, m)| *m)
                .collect();
            if members.is_empty() {
                continue;
            }
            let cases = pairs.iter().filter(|(t, _)| t.family() == family).count();
            rows.push(ReportRow::classification(
                regime,
                RowKind::Family,
                family.id(),
                macro_prf(&members),
                cases,
            ));
        }
        if gran == Granularity::Type {
            for (c, m) in &per_class {
                rows.push(ReportRow::classification(
                    regime,
                    RowKind::Type,
                    c.id(),
                    *m,
                    support(*c),
                ));
            }
        }
        let all: Vec<Prf> = per_class.iter().map(|(_, m)| *m).collect();
        rows.push(ReportRow::classification(
            regime,
            RowKind::Macro,
            "macro",
            macro_prf(&all),
            pairs.len(),
        ));
    }
    if !any {
        return Err(EvalError::EmptyClass("benchmark has no fault runs".into()));
    }
    Ok(EvalReport {
        task: EvalTask::Diagnosis,
        config: EvalConfig {
            horizon: params.horizon,
            seed,
            k_coef: params.pipeline.then_some(params.k_coef),
            no_temporal: params.options.no_temporal,
            no_fingerprint: params.options.no_fingerprint,
            granularity: Some(gran),
            pipeline: params.pipeline,
            ..EvalConfig::default()
        },
        folds: params.folds,
        rows,
    })
}
