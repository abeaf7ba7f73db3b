use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detect::{DeviationVector, SeverityScore};
use crate::model::{DifficultyRegime, FaultType, TrainingRun};
use crate::sim::RngStream;

use super::config::{Knob, RFTConfig};
use super::RemediateError;

/// Most knobs one action may change.
pub const MAX_CHANGES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSummary {
    pub name: String,
    pub value: f64,
}

/// What the planner sees about a faulty run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionState {
    pub run_id: String,
    pub label: FaultType,
    pub severity: f64,
    pub top_deviations: Vec<DeviationSummary>,
    pub invariant_scores: Vec<f64>,
    pub config: RFTConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<DifficultyRegime>,
}

/// Builds the planner state. `label` is the attributed (or true) fault.
pub fn build_state(
    run: &TrainingRun,
    label: FaultType,
    deviations: &DeviationVector,
    severity: &SeverityScore,
    config: &RFTConfig,
) -> Result<InterventionState, RemediateError> {
    if label == FaultType::Normal {
        return Err(RemediateError::NormalLabelRejected);
    }
    let mut ranked: Vec<_> = deviations.entries.iter().collect();
    // stable sort keeps statistic order among equal values
    ranked.sort_by(|a, b| b.value.total_cmp(&a.value));
    let top_deviations = ranked
        .into_iter()
        .take(3)
        .map(|e| DeviationSummary {
            name: e.name.clone(),
            value: e.value,
        })
        .collect();
    Ok(InterventionState {
        run_id: run.run_id().to_string(),
        label,
        severity: severity.overall,
        top_deviations,
        invariant_scores: severity.per_invariant.clone(),
        config: config.clone(),
        regime: run.regime(),
    })
}

/// A bounded configuration change: knob name to new value, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionAction {
    pub changes: Vec<(String, f64)>,
    pub rationale: String,
}

impl InterventionAction {
    pub fn empty() -> Self {
        InterventionAction {
            changes: Vec::new(),
            rationale: String::new(),
        }
    }

    pub fn from_knobs(changes: &[(Knob, f64)], rationale: impl Into<String>) -> Self {
        InterventionAction {
            changes: changes
                .iter()
                .map(|(k, v)| (k.name().to_string(), *v))
                .collect(),
            rationale: rationale.into(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    /// Resolves knob names and checks bounds and the change budget.
    pub fn knobs(&self) -> Result<Vec<(Knob, f64)>, RemediateError> {
        if self.changes.len() > MAX_CHANGES {
            return Err(RemediateError::TooManyChanges(self.changes.len()));
        }
        self.changes
            .iter()
            .map(|(name, v)| {
                let k: Knob = name.parse()?;
                if !k.in_bounds(*v) {
                    return Err(RemediateError::OutOfBounds {
                        knob: name.clone(),
                        value: *v,
                    });
                }
                Ok((k, *v))
            })
            .collect()
    }
}

/// The practitioner remedy for each fault type.
pub fn remedy(fault: FaultType) -> Vec<(Knob, f64)> {
    use FaultType::*;
    use Knob::*;
    match fault {
        RewardSpike => vec![(RewardClip, 1.0)],
        RewardCollapse => vec![(RewardClip, 1.0), (LearningRateScale, 0.5)],
        RewardHacking => vec![(RewardClip, 1.0), (EntropyBonus, 0.1)],
        EmptyResponse => vec![(MinNewTokensScale, 2.0)],
        RepetitionCollapse => vec![(RepetitionPenalty, 1.3), (EntropyBonus, 0.05)],
        LengthShort => vec![(MinNewTokensScale, 2.0)],
        LengthLong => vec![(MaxNewTokensScale, 0.5)],
        KlExplosion => vec![(KlCoef, 0.5), (LearningRateScale, 0.5)],
        UpdateFreeze => vec![(LearningRateScale, 2.0)],
        EntropyCollapse => vec![(EntropyBonus, 0.2)],
        ValueMismatch => vec![(ValueLossCoef, 1.5)],
        AdvantageInstability => vec![(AdvantageNorm, 1.0)],
        DelayedCredit => vec![(GaeLambda, 0.9)],
        ToolCallError => vec![(ToolRetry, 2.0)],
        ObservationCorruption => vec![(EpisodeGuard, 1.0)],
        TerminationError => vec![(EpisodeGuard, 1.0)],
        Normal => Vec::new(),
    }
}

/// Looks the state's label up in the remedy table.
pub fn plan_action_rule(state: &InterventionState) -> InterventionAction {
    InterventionAction::from_knobs(&remedy(state.label), format!("remedy for {}", state.label))
}

/// One to three distinct knobs set to uniform values within bounds.
pub fn plan_action_random(seed: u64) -> InterventionAction {
    let mut rng = RngStream::new(seed, 40).rng();
    let n = rng.random_range(1..=MAX_CHANGES);
    let knobs: Vec<Knob> = Knob::ALL.choose_multiple(&mut rng, n).copied().collect();
    let changes: Vec<(Knob, f64)> = knobs
        .into_iter()
        .map(|k| {
            let (lo, hi) = k.bounds();
            (k, k.clamp(rng.random_range(lo..=hi)))
        })
        .collect();
    InterventionAction::from_knobs(&changes, "random knobs")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remedy_table_is_total_and_minimal() {
        for f in FaultType::ALL {
            let r = remedy(f);
            assert!(!r.is_empty() && r.len() <= MAX_CHANGES, "{f}");
            for (k, v) in r {
                assert!(k.in_bounds(v), "{f} {k}");
            }
        }
    }

    #[test]
    fn random_actions_are_valid() {
        for seed in 0..200 {
            let a = plan_action_random(seed);
            let k = a.knobs().unwrap();
            assert!(!k.is_empty() && k.len() <= MAX_CHANGES);
        }
    }
}
