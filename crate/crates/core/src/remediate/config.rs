use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::Signal;

use super::RemediateError;

/// A tunable training knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    RewardClip,
    KlCoef,
    LearningRateScale,
    EntropyBonus,
    MaxNewTokensScale,
    MinNewTokensScale,
    RepetitionPenalty,
    ValueLossCoef,
    AdvantageNorm,
    GaeLambda,
    ToolRetry,
    EpisodeGuard,
}

impl Knob {
    pub const ALL: [Knob; 12] = [
        Knob::RewardClip,
        Knob::KlCoef,
        Knob::LearningRateScale,
        Knob::EntropyBonus,
        Knob::MaxNewTokensScale,
        Knob::MinNewTokensScale,
        Knob::RepetitionPenalty,
        Knob::ValueLossCoef,
        Knob::AdvantageNorm,
        Knob::GaeLambda,
        Knob::ToolRetry,
        Knob::EpisodeGuard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Knob::RewardClip => "reward_clip",
            Knob::KlCoef => "kl_coef",
            Knob::LearningRateScale => "learning_rate_scale",
            Knob::EntropyBonus => "entropy_bonus",
            Knob::MaxNewTokensScale => "max_new_tokens_scale",
            Knob::MinNewTokensScale => "min_new_tokens_scale",
            Knob::RepetitionPenalty => "repetition_penalty",
            Knob::ValueLossCoef => "value_loss_coef",
            Knob::AdvantageNorm => "advantage_norm",
            Knob::GaeLambda => "gae_lambda",
            Knob::ToolRetry => "tool_retry",
            Knob::EpisodeGuard => "episode_guard",
        }
    }

    /// Inclusive `(low, high)` bounds.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Knob::RewardClip => (0.5, 5.0),
            Knob::KlCoef => (0.0, 1.0),
            Knob::LearningRateScale => (0.1, 10.0),
            Knob::EntropyBonus => (0.0, 0.5),
            Knob::MaxNewTokensScale | Knob::MinNewTokensScale => (0.25, 4.0),
            Knob::RepetitionPenalty => (1.0, 2.0),
            Knob::ValueLossCoef => (0.0, 2.0),
            Knob::AdvantageNorm | Knob::EpisodeGuard => (0.0, 1.0),
            Knob::GaeLambda => (0.8, 1.0),
            Knob::ToolRetry => (0.0, 3.0),
        }
    }

    /// Integer-valued knobs.
    pub fn is_discrete(self) -> bool {
        matches!(
            self,
            Knob::AdvantageNorm | Knob::ToolRetry | Knob::EpisodeGuard
        )
    }

    pub fn baseline(self) -> f64 {
        match self {
            Knob::RewardClip => 5.0,
            Knob::KlCoef => 0.05,
            Knob::LearningRateScale => 1.0,
            Knob::EntropyBonus => 0.0,
            Knob::MaxNewTokensScale | Knob::MinNewTokensScale => 1.0,
            Knob::RepetitionPenalty => 1.0,
            Knob::ValueLossCoef => 0.5,
            Knob::AdvantageNorm => 0.0,
            Knob::GaeLambda => 1.0,
            Knob::ToolRetry | Knob::EpisodeGuard => 0.0,
        }
    }

    /// The signal whose noise grows when this knob is changed without
    /// addressing the fault.
    pub fn side_effect_signal(self) -> Signal {
        match self {
            Knob::RewardClip => Signal::Reward,
            Knob::KlCoef => Signal::Kl,
            Knob::LearningRateScale => Signal::PolicyLoss,
            Knob::EntropyBonus | Knob::RepetitionPenalty => Signal::Entropy,
            Knob::MaxNewTokensScale | Knob::MinNewTokensScale => Signal::ResponseLength,
            Knob::ValueLossCoef => Signal::Value,
            Knob::AdvantageNorm => Signal::AdvantageMean,
            Knob::GaeLambda => Signal::Return,
            Knob::ToolRetry => Signal::ToolErrorRate,
            Knob::EpisodeGuard => Signal::TruncationRate,
        }
    }

    /// Clamps into bounds, rounding discrete knobs to the nearest integer.
    pub fn clamp(self, v: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let v = if self.is_discrete() { v.round() } else { v };
        v.clamp(lo, hi)
    }

    pub fn in_bounds(self, v: f64) -> bool {
        let (lo, hi) = self.bounds();
        v.is_finite() && v >= lo && v <= hi && (!self.is_discrete() || v.fract() == 0.0)
    }

    /// `|new - old| / (high - low)`.
    pub fn normalized_delta(self, old: f64, new: f64) -> f64 {
        let (lo, hi) = self.bounds();
        (new - old).abs() / (hi - lo)
    }
}

impl fmt::Display for Knob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Knob {
    type Err = RemediateError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Knob::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RemediateError::UnknownKnob(s.to_string()))
    }
}

/// Training configuration as seen by the remediation loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RFTConfig {
    pub reward_clip: f64,
    pub kl_coef: f64,
    pub learning_rate_scale: f64,
    pub entropy_bonus: f64,
    pub max_new_tokens_scale: f64,
    pub min_new_tokens_scale: f64,
    pub repetition_penalty: f64,
    pub value_loss_coef: f64,
    pub advantage_norm: f64,
    pub gae_lambda: f64,
    pub tool_retry: f64,
    pub episode_guard: f64,
}

impl RFTConfig {
    pub fn baseline() -> Self {
        RFTConfig {
            reward_clip: Knob::RewardClip.baseline(),
            kl_coef: Knob::KlCoef.baseline(),
            learning_rate_scale: Knob::LearningRateScale.baseline(),
            entropy_bonus: Knob::EntropyBonus.baseline(),
            max_new_tokens_scale: Knob::MaxNewTokensScale.baseline(),
            min_new_tokens_scale: Knob::MinNewTokensScale.baseline(),
            repetition_penalty: Knob::RepetitionPenalty.baseline(),
            value_loss_coef: Knob::ValueLossCoef.baseline(),
            advantage_norm: Knob::AdvantageNorm.baseline(),
            gae_lambda: Knob::GaeLambda.baseline(),
            tool_retry: Knob::ToolRetry.baseline(),
            episode_guard: Knob::EpisodeGuard.baseline(),
        }
    }

    pub fn get(&self, k: Knob) -> f64 {
        match k {
            Knob::RewardClip => self.reward_clip,
            Knob::KlCoef => self.kl_coef,
            Knob::LearningRateScale => self.learning_rate_scale,
            Knob::EntropyBonus => self.entropy_bonus,
            Knob::MaxNewTokensScale => self.max_new_tokens_scale,
            Knob::MinNewTokensScale => self.min_new_tokens_scale,
            Knob::RepetitionPenalty => self.repetition_penalty,
            Knob::ValueLossCoef => self.value_loss_coef,
            Knob::AdvantageNorm => self.advantage_norm,
            Knob::GaeLambda => self.gae_lambda,
            Knob::ToolRetry => self.tool_retry,
            Knob::EpisodeGuard => self.episode_guard,
        }
    }

    pub fn set(&mut self, k: Knob, v: f64) {
        let slot = match k {
            Knob::RewardClip => &mut self.reward_clip,
            Knob::KlCoef => &mut self.kl_coef,
            Knob::LearningRateScale => &mut self.learning_rate_scale,
            Knob::EntropyBonus => &mut self.entropy_bonus,
            Knob::MaxNewTokensScale => &mut self.max_new_tokens_scale,
            Knob::MinNewTokensScale => &mut self.min_new_tokens_scale,
            Knob::RepetitionPenalty => &mut self.repetition_penalty,
            Knob::ValueLossCoef => &mut self.value_loss_coef,
            Knob::AdvantageNorm => &mut self.advantage_norm,
            Knob::GaeLambda => &mut self.gae_lambda,
            Knob::ToolRetry => &mut self.tool_retry,
            Knob::EpisodeGuard => &mut self.episode_guard,
        };
        *slot = v;
    }

    pub fn validate(&self) -> Result<(), RemediateError> {
        for k in Knob::ALL {
            let v = self.get(k);
            if !k.in_bounds(v) {
                return Err(RemediateError::OutOfBounds {
                    knob: k.name().to_string(),
                    value: v,
                });
            }
        }
        Ok(())
    }
}

impl Default for RFTConfig {
    fn default() -> Self {
        Self::baseline()
    }
}
