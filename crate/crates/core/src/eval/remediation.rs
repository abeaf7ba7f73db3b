use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribute::{attribute, fingerprint, fit_attributor, Attribution, Granularity};
use crate::detect::{
    calibrate, compute_threshold, detect, extract_deviations, DetectOptions, DEFAULT_HORIZON,
    DEFAULT_K,
};
use crate::inject::load_benchmark;
use crate::model::{DifficultyRegime, FaultFamily, FaultType, TrainingRun};
use crate::remediate::{
    build_state, execute, mitigation_metrics, plan_action_llm, plan_action_random,
    plan_action_rule, revalidate, ChatTransport, InterventionAction, MitigationMetrics,
    PlannerEndpoint, RFTConfig, RemediationOutcome,
};
use crate::sim::{derive_seed, RngStream};

use super::report::{EvalConfig, EvalReport, EvalTask, ReportRow, RowKind};
use super::{check_horizon, EvalError};

const SAMPLE_STREAM: u64 = 51;

/// Default number of sampled runs per family.
pub const DEFAULT_PER_FAMILY: usize = 15;

/// Who chooses the action and from which label.
#[derive(Clone, Copy)]
pub enum Planner<'a> {
    /// Remedy table applied to the true label.
    Oracle,
    /// Remedy table applied to the attributed label.
    Rule,
    /// Random knobs, ignoring the label.
    Random,
    /// Chat-completion planner given the attributed label.
    Llm {
        transport: &'a (dyn ChatTransport + Sync),
        endpoint: &'a PlannerEndpoint,
    },
}

impl Planner<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Planner::Oracle => "oracle",
            Planner::Rule => "rule",
            Planner::Random => "random",
            Planner::Llm { .. } => "llm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemediationParams {
    pub horizon: usize,
    pub k_coef: f64,
    pub per_family: usize,
}

impl Default for RemediationParams {
    fn default() -> Self {
        RemediationParams {
            horizon: DEFAULT_HORIZON,
            k_coef: DEFAULT_K,
            per_family: DEFAULT_PER_FAMILY,
        }
    }
}

/// A remediation report with the per-case outcomes behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemediationReport {
    pub report: EvalReport,
    pub overall: MitigationMetrics,
    pub families: Vec<(FaultFamily, MitigationMetrics)>,
    pub outcomes: Vec<RemediationOutcome>,
}

pub fn eval_remediation(
    dir: &Path,
    planner: Planner<'_>,
    params: &RemediationParams,
    seed: u64,
) -> Result<RemediationReport, EvalError> {
    let bench = load_benchmark(dir)?;
    remediation_report(&bench.runs, planner, params, seed)
}

/// Samples detected easy fault runs per family and runs each through
/// attribute, plan, execute and revalidate.
///
/// The attributor is fitted on the easy fault runs that were not sampled.
pub fn remediation_report(
    runs: &[TrainingRun],
    planner: Planner<'_>,
    params: &RemediationParams,
    seed: u64,
) -> Result<RemediationReport, EvalError> {
    check_horizon(runs, params.horizon)?;
    let h = params.horizon;
    let normals: Vec<TrainingRun> = runs
        .iter()
        .filter(|r| r.label().is_normal())
        .cloned()
        .collect();
    let profile = calibrate(&normals, h)?;
    let tau = compute_threshold(
        &profile,
        &normals,
        params.k_coef,
        h,
        DetectOptions::default(),
    )?;

    let easy: Vec<&TrainingRun> = runs
        .iter()
        .filter(|r| r.regime() == Some(DifficultyRegime::Easy))
        .collect();
    let flagged: Vec<bool> = easy
        .par_iter()
        .map(|r| detect(r, &profile, tau, h, DetectOptions::default()).map(|d| d.is_anomalous))
        .collect::<Result<_, _>>()?;
    let mut rng = RngStream::new(seed, SAMPLE_STREAM).rng();
    let mut sampled = vec![false; easy.len()];
    for family in FaultFamily::FAULTY {
        let mut pool: Vec<usize> = (0..easy.len())
            .filter(|&i| flagged[i] && easy[i].label().family() == family)
            .collect();
        pool.sort_by(|&a, &b| easy[a].run_id().cmp(easy[b].run_id()));
        pool.shuffle(&mut rng);
        if pool.len() < params.per_family {
            log::warn!(
                "only {} detected {family:?} runs for {} cases",
                pool.len(),
                params.per_family
            );
        }
        for &i in pool.iter().take(params.per_family) {
            sampled[i] = true;
        }
    }
    let cases: Vec<&TrainingRun> = (0..easy.len())
        .filter(|&i| sampled[i])
        .map(|i| easy[i])
        .collect();
    if cases.is_empty() {
        return Err(EvalError::NoCases);
    }

    let model = match planner {
        Planner::Rule | Planner::Llm { .. } => {
            let train = (0..easy.len())
                .filter(|&i| !sampled[i])
                .map(|i| Ok((fingerprint(easy[i], &profile, h)?, easy[i].label())))
                .collect::<Result<Vec<_>, EvalError>>()?;
            Some(fit_attributor(&train, Granularity::Type)?)
        }
        Planner::Oracle | Planner::Random => None,
    };

    let base = RFTConfig::baseline();
    let outcomes = cases
        .par_iter()
        .map(|run| {
            let label = match &model {
                Some(m) => match attribute(m, &fingerprint(run, &profile, h)?)? {
                    Attribution::Type(t) => t,
                    Attribution::Family(f) => f.types().next().unwrap_or(FaultType::Normal),
                },
                None => run.label().fault_type(),
            };
            let dev = extract_deviations(run, &profile, h)?;
            let sev = crate::detect::score(&dev);
            let state = build_state(run, label, &dev, &sev, &base)?;
            let action: InterventionAction = match planner {
                Planner::Oracle | Planner::Rule => plan_action_rule(&state),
                Planner::Random => plan_action_random(derive_seed(seed, &[run.seed()])),
                Planner::Llm {
                    transport,
                    endpoint,
                } => plan_action_llm(transport, endpoint, &state)?.action,
            };
            let updated = execute(&base, &action)?;
            Ok(revalidate(
                run,
                &base,
                &updated,
                &action,
                &profile,
                h,
                run.seed(),
            )?)
        })
        .collect::<Result<Vec<RemediationOutcome>, EvalError>>()?;

    let overall = mitigation_metrics(&outcomes)?;
    let mut families = Vec::new();
    let mut rows = Vec::new();
    for family in FaultFamily::FAULTY {
        let mine: Vec<RemediationOutcome> = outcomes
            .iter()
            .filter(|o| o.fault_type.family() == family)
            .cloned()
            .collect();
        if mine.is_empty() {
            continue;
        }
        let m = mitigation_metrics(&mine)?;
        rows.push(metric_row(RowKind::Family, family.id(), &m));
        families.push((family, m));
    }
    rows.push(metric_row(RowKind::Macro, "overall", &overall));
    let report = EvalReport {
        task: EvalTask::Remediation,
        config: EvalConfig {
            horizon: h,
            seed,
            k_coef: Some(params.k_coef),
            planner: Some(planner.name().to_string()),
            per_family: Some(params.per_family),
            ..EvalConfig::default()
        },
        folds: 0,
        rows,
    };
    Ok(RemediationReport {
        report,
        overall,
        families,
        outcomes,
    })
}

fn metric_row(kind: RowKind, group: &str, m: &MitigationMetrics) -> ReportRow {
    ReportRow {
        regime: DifficultyRegime::Easy,
        kind,
        group: group.to_string(),
        precision: None,
        recall: None,
        f1: None,
        mitigation_rate: Some(100.0 * m.mitigation_rate),
        median_severity_change: Some(m.median_severity_change),
        cases: m.cases,
    }
}
