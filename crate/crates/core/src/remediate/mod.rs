//! Closed-loop remediation: plan a bounded configuration change, re-run
//! the training under it and check whether severity went down.

mod config;
mod llm;
mod plan;

pub use config::{Knob, RFTConfig};
pub use llm::{
    build_request, parse_reply, plan_action_llm, ChatMessage, ChatRequest, ChatTransport,
    HttpTransport, LlmPlan, PlannerEndpoint, PlannerError, TransportError, DEFAULT_TIMEOUT,
    TOKEN_ENV,
};
pub use plan::{
    build_state, plan_action_random, plan_action_rule, remedy, DeviationSummary,
    InterventionAction, InterventionState, MAX_CHANGES,
};

use serde::{Deserialize, Serialize};

use crate::detect::{severity, DetectError, DetectOptions, NormalProfile};
use crate::inject::perturbation;
use crate::model::{FaultType, RunError, TrainingRun};
use crate::sim::{generate, NoiseScale, SimConfig};
use crate::stats;

/// Attenuation per unit of normalized change for a knob that addresses the
/// fault.
pub const REMEDY_EFFICACY: f64 = 0.8;
/// Extra noise per unit of normalized change for a knob that does not.
pub const SIDE_EFFECT_GAIN: f64 = 0.5;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum RemediateError {
    #[error("unknown knob {0:?}")]
    UnknownKnob(String),
    #[error("{knob} = {value} is out of bounds")]
    OutOfBounds { knob: String, value: f64 },
    #[error("action changes {0} knobs, at most 3 allowed")]
    TooManyChanges(usize),
    #[error("cannot plan a remedy for a NORMAL label")]
    NormalLabelRejected,
    #[error("run {0} carries no injection schedule")]
    MissingInjectionMeta(String),
    #[error("no remediation outcomes")]
    EmptyOutcomeSet,
    #[error("original severity of {0} is zero")]
    ZeroOriginalSeverity(String),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// `config` with the action's knobs replaced.
pub fn execute(
    config: &RFTConfig,
    action: &InterventionAction,
) -> Result<RFTConfig, RemediateError> {
    let mut out = config.clone();
    for (k, v) in action.knobs()? {
        out.set(k, v);
    }
    Ok(out)
}

/// How a configuration change acts on a fault: the factor on its strength
/// and the extra noise from knobs that do not address it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MitigationEffect {
    pub strength_factor: f64,
    pub noise: NoiseScale,
}

pub fn mitigation_effect(
    fault: FaultType,
    base: &RFTConfig,
    updated: &RFTConfig,
) -> MitigationEffect {
    let remedy_knobs: Vec<Knob> = remedy(fault).into_iter().map(|(k, _)| k).collect();
    let mut factor = 1.0;
    let mut noise = NoiseScale::UNIT;
    for k in Knob::ALL {
        let (old, new) = (base.get(k), updated.get(k));
        if old == new {
            continue;
        }
        let delta = k.normalized_delta(old, new);
        if remedy_knobs.contains(&k) {
            factor *= 1.0 - REMEDY_EFFICACY * delta;
        } else if let Some(slot) = noise.get_mut(k.side_effect_signal()) {
            *slot *= 1.0 + SIDE_EFFECT_GAIN * delta;
        }
    }
    MitigationEffect {
        strength_factor: factor.max(0.0),
        noise,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemediationOutcome {
    pub run_id: String,
    pub fault_type: FaultType,
    pub original_severity: f64,
    pub post_severity: f64,
    pub mitigated: bool,
    pub action: InterventionAction,
    pub post_run_id: String,
}

/// Re-simulates `original` from step 0 with `seed` under `updated` and
/// compares severities.
///
/// The fault keeps its schedule, attenuated by [`mitigation_effect`]
/// relative to `base`.
#[allow(clippy::too_many_arguments)]
pub fn revalidate(
    original: &TrainingRun,
    base: &RFTConfig,
    updated: &RFTConfig,
    action: &InterventionAction,
    profile: &NormalProfile,
    horizon: usize,
    seed: u64,
) -> Result<RemediationOutcome, RemediateError> {
    let schedule = original
        .injection()
        .ok_or_else(|| RemediateError::MissingInjectionMeta(original.run_id().to_string()))?;
    let fault = original.label().fault_type();
    let effect = mitigation_effect(fault, base, updated);
    let mut p = perturbation(fault, &schedule.scaled(effect.strength_factor), seed);
    p.global_noise = effect.noise;
    let sim = SimConfig::with_steps(original.len());
    let post_run_id = format!("{}_remediated", original.run_id());
    let rerun = TrainingRun::new(
        post_run_id.clone(),
        original.label(),
        original.regime(),
        seed,
        generate(&sim, seed, &p),
        Some(schedule.scaled(effect.strength_factor)),
    )?;
    let before = severity(original, profile, horizon, DetectOptions::default())?.overall;
    let after = severity(&rerun, profile, horizon, DetectOptions::default())?.overall;
    Ok(RemediationOutcome {
        run_id: original.run_id().to_string(),
        fault_type: fault,
        original_severity: before,
        post_severity: after,
        mitigated: after < before,
        action: action.clone(),
        post_run_id,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitigationMetrics {
    /// Fraction of cases whose severity went down.
    pub mitigation_rate: f64,
    /// Median relative severity change in percent; positive means better.
    pub median_severity_change: f64,
    pub cases: usize,
}

/// Relative severity change `(before - after) / before` in percent.
pub fn severity_change(before: f64, after: f64) -> f64 {
    (before - after) / before * 100.0
}

pub fn mitigation_metrics(
    outcomes: &[RemediationOutcome],
) -> Result<MitigationMetrics, RemediateError> {
    if outcomes.is_empty() {
        return Err(RemediateError::EmptyOutcomeSet);
    }
    let mut changes = Vec::with_capacity(outcomes.len());
    let mut mitigated = 0usize;
    for o in outcomes {
        if !(o.original_severity > 0.0) {
            return Err(RemediateError::ZeroOriginalSeverity(o.run_id.clone()));
        }
        if o.post_severity < o.original_severity {
            mitigated += 1;
        }
        changes.push(severity_change(o.original_severity, o.post_severity));
    }
    Ok(MitigationMetrics {
        mitigation_rate: mitigated as f64 / outcomes.len() as f64,
        median_severity_change: stats::median(&changes),
        cases: outcomes.len(),
    })
}
