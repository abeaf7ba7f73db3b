use serde::{Deserialize, Serialize};

use crate::detect::NormalProfile;
use crate::model::{Channel, DifficultyRegime, FaultType, Signal, TrainingRun};
use crate::stats;

use super::{FaultSpec, InjectError};

/// Which side of the bound a passing statistic lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub passed: bool,
    pub statistic_name: String,
    pub statistic_value: f64,
    pub bound: f64,
    pub direction: Direction,
}

impl VerificationResult {
    fn new(name: &str, value: f64, bound: f64, direction: Direction) -> Self {
        let passed = match direction {
            Direction::AtLeast => value >= bound,
            Direction::AtMost => value <= bound,
        };
        VerificationResult {
            passed,
            statistic_name: name.to_string(),
            statistic_value: value,
            bound,
            direction,
        }
    }
}

/// Robust-z bound for the regime: 3 for easy runs, 1.5 for hard ones.
pub fn regime_bound(regime: DifficultyRegime) -> f64 {
    match regime {
        DifficultyRegime::Easy => 3.0,
        DifficultyRegime::Hard => 1.5,
    }
}

/// Checks that `run` shows the signature of `spec`'s fault.
///
/// Statistics are taken over the run's active steps (every step when the
/// run carries no schedule).
pub fn verify(
    run: &TrainingRun,
    spec: &FaultSpec,
    profile: &NormalProfile,
) -> Result<VerificationResult, InjectError> {
    verify_with_bound(run, spec.fault_type, spec.regime, profile)
}

pub fn verify_with_bound(
    run: &TrainingRun,
    fault: FaultType,
    regime: DifficultyRegime,
    profile: &NormalProfile,
) -> Result<VerificationResult, InjectError> {
    let b = regime_bound(regime);
    let easy = regime == DifficultyRegime::Easy;
    let active: Vec<usize> = match run.injection() {
        Some(s) => s.active_steps(),
        None => (0..run.len()).collect(),
    };
    let recs = run.steps();
    let z_series = |c: Channel| -> Result<Vec<f64>, InjectError> {
        let band = profile.band(c)?;
        Ok(active
            .iter()
            .map(|&t| band.z(t, c.value(&recs[t])))
            .collect())
    };
    let mean_z = |sig: Signal| -> Result<f64, InjectError> {
        Ok(stats::mean(&z_series(Channel::Signal(sig))?))
    };
    use Direction::*;
    let r = match fault {
        FaultType::RewardSpike => {
            VerificationResult::new("reward_z_mean", mean_z(Signal::Reward)?, b, AtLeast)
        }
        FaultType::RewardCollapse => {
            VerificationResult::new("reward_z_mean", mean_z(Signal::Reward)?, -b, AtMost)
        }
        FaultType::RewardHacking => {
            let v = mean_z(Signal::Reward)?.min(-mean_z(Signal::Entropy)?);
            VerificationResult::new("min(reward_z, -entropy_z)", v, b, AtLeast)
        }
        FaultType::EmptyResponse => {
            // length z <= -b and reward z <= -2b/3, folded into one margin
            let v = (-mean_z(Signal::ResponseLength)?).min(-1.5 * mean_z(Signal::Reward)?);
            VerificationResult::new("min(-length_z, -1.5 reward_z)", v, b, AtLeast)
        }
        FaultType::RepetitionCollapse => {
            VerificationResult::new("entropy_z_mean", mean_z(Signal::Entropy)?, -b, AtMost)
        }
        FaultType::LengthShort => {
            VerificationResult::new("length_z_mean", mean_z(Signal::ResponseLength)?, -b, AtMost)
        }
        FaultType::LengthLong => {
            VerificationResult::new("length_z_mean", mean_z(Signal::ResponseLength)?, b, AtLeast)
        }
        FaultType::KlExplosion => {
            // second-largest rather than largest: a single noisy step is not
            // an explosion
            let mut zs = z_series(Channel::Signal(Signal::Kl))?;
            zs.sort_by(|a, b| b.total_cmp(a));
            let v = zs
                .get(1)
                .or(zs.first())
                .copied()
                .unwrap_or(f64::NEG_INFINITY);
            VerificationResult::new("kl_z_second_max", v, b, AtLeast)
        }
        FaultType::UpdateFreeze => {
            let bound = if easy { 0.25 } else { 0.8 };
            VerificationResult::new(
                "step_delta_ratio",
                freeze_ratio(run, &active, profile)?,
                bound,
                AtMost,
            )
        }
        FaultType::EntropyCollapse => {
            let half = run.len() / 2;
            let late: Vec<usize> = active.iter().copied().filter(|&t| t >= half).collect();
            let steps = if late.is_empty() { &active } else { &late };
            let band = profile.band(Channel::Signal(Signal::Entropy))?;
            let zs: Vec<f64> = steps
                .iter()
                .map(|&t| band.z(t, recs[t].entropy_mean))
                .collect();
            VerificationResult::new("late_entropy_z_mean", stats::mean(&zs), -b, AtMost)
        }
        FaultType::ValueMismatch => {
            let v = stats::mean(&z_series(Channel::ValueGap)?).abs();
            VerificationResult::new("value_gap_z_mean", v, b, AtLeast)
        }
        FaultType::AdvantageInstability => VerificationResult::new(
            "advantage_std_z_mean",
            mean_z(Signal::AdvantageStd)?,
            b,
            AtLeast,
        ),
        FaultType::DelayedCredit => {
            let bound = if easy { 0.3 } else { 0.5 };
            VerificationResult::new(
                "reward_return_delta_corr",
                credit_correlation(run, &active),
                bound,
                AtMost,
            )
        }
        FaultType::ToolCallError => VerificationResult::new(
            "tool_error_z_mean",
            mean_z(Signal::ToolErrorRate)?,
            b,
            AtLeast,
        ),
        FaultType::ObservationCorruption => {
            let zs = z_series(Channel::Signal(Signal::ResponseLength))?;
            let frac = zs.iter().filter(|z| z.abs() > 4.0).count() as f64 / zs.len().max(1) as f64;
            VerificationResult::new("length_outlier_fraction", frac, 0.1, AtLeast)
        }
        FaultType::TerminationError => VerificationResult::new(
            "truncation_z_mean",
            mean_z(Signal::TruncationRate)?,
            b,
            AtLeast,
        ),
        FaultType::Normal => {
            return Err(InjectError::InvalidSpec(
                "NORMAL has no verifier rule".into(),
            ))
        }
    };
    Ok(r)
}

/// Pairs of consecutive active steps.
fn active_pairs(active: &[usize]) -> Vec<(usize, usize)> {
    active
        .windows(2)
        .filter(|w| w[1] == w[0] + 1)
        .map(|w| (w[0], w[1]))
        .collect()
}

/// Mean over reward, entropy and length of the mean absolute change between
/// consecutive active steps, relative to the profile's typical change.
fn freeze_ratio(
    run: &TrainingRun,
    active: &[usize],
    profile: &NormalProfile,
) -> Result<f64, InjectError> {
    let pairs = active_pairs(active);
    if pairs.is_empty() {
        return Ok(f64::INFINITY);
    }
    let recs = run.steps();
    let mut ratios = Vec::with_capacity(3);
    for sig in [Signal::Reward, Signal::Entropy, Signal::ResponseLength] {
        let c = Channel::Signal(sig);
        let d: Vec<f64> = pairs
            .iter()
            .map(|&(a, b)| (c.value(&recs[b]) - c.value(&recs[a])).abs())
            .collect();
        ratios.push(stats::mean(&d) / profile.band(c)?.step_delta_mean);
    }
    Ok(stats::mean(&ratios))
}

/// Correlation of reward changes with return changes over consecutive
/// active steps. Healthy returns move with reward.
fn credit_correlation(run: &TrainingRun, active: &[usize]) -> f64 {
    let pairs = active_pairs(active);
    if pairs.len() < 2 {
        return 1.0;
    }
    let recs = run.steps();
    let dr: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| recs[b].reward_mean - recs[a].reward_mean)
        .collect();
    let dg: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| recs[b].return_mean - recs[a].return_mean)
        .collect();
    stats::correlation(&dr, &dg)
}
