use std::fmt;

use serde::{Deserialize, Serialize};

/// Aggregated telemetry for one training step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainStepRecord {
    pub step: u64,
    pub reward_mean: f64,
    pub kl_mean: f64,
    pub entropy_mean: f64,
    pub return_mean: f64,
    pub value_mean: f64,
    pub advantage_mean: f64,
    pub advantage_std: f64,
    pub response_length_mean: f64,
    pub policy_loss: f64,
    pub tool_error_rate: f64,
    pub truncation_rate: f64,
}

impl TrainStepRecord {
    /// Checks finiteness and per-field domains, returning the offending field name.
    pub fn check_domains(&self) -> Result<(), &'static str> {
        for signal in Signal::ALL {
            if !self.get(signal).is_finite() {
                return Err(signal.name());
            }
        }
        let non_negative = [
            (self.kl_mean, "kl_mean"),
            (self.entropy_mean, "entropy_mean"),
            (self.advantage_std, "advantage_std"),
            (self.response_length_mean, "response_length_mean"),
        ];
        if let Some((_, name)) = non_negative.iter().find(|(v, _)| *v < 0.0) {
            return Err(name);
        }
        let rates = [
            (self.tool_error_rate, "tool_error_rate"),
            (self.truncation_rate, "truncation_rate"),
        ];
        if let Some((_, name)) = rates.iter().find(|(v, _)| !(0.0..=1.0).contains(v)) {
            return Err(name);
        }
        Ok(())
    }

    pub fn get(&self, signal: Signal) -> f64 {
        match signal {
            Signal::Reward => self.reward_mean,
            Signal::Kl => self.kl_mean,
            Signal::Entropy => self.entropy_mean,
            Signal::Return => self.return_mean,
            Signal::Value => self.value_mean,
            Signal::AdvantageMean => self.advantage_mean,
            Signal::AdvantageStd => self.advantage_std,
            Signal::ResponseLength => self.response_length_mean,
            Signal::PolicyLoss => self.policy_loss,
            Signal::ToolErrorRate => self.tool_error_rate,
            Signal::TruncationRate => self.truncation_rate,
            Signal::Step => self.step as f64,
        }
    }

    pub fn get_mut(&mut self, signal: Signal) -> Option<&mut f64> {
        Some(match signal {
            Signal::Reward => &mut self.reward_mean,
            Signal::Kl => &mut self.kl_mean,
            Signal::Entropy => &mut self.entropy_mean,
            Signal::Return => &mut self.return_mean,
            Signal::Value => &mut self.value_mean,
            Signal::AdvantageMean => &mut self.advantage_mean,
            Signal::AdvantageStd => &mut self.advantage_std,
            Signal::ResponseLength => &mut self.response_length_mean,
            Signal::PolicyLoss => &mut self.policy_loss,
            Signal::ToolErrorRate => &mut self.tool_error_rate,
            Signal::TruncationRate => &mut self.truncation_rate,
            Signal::Step => return None,
        })
    }
}

/// One telemetry channel of a [`TrainStepRecord`].
///
/// `Step` is the index column; the remaining eleven are the measured signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Step,
    Reward,
    Kl,
    Entropy,
    Return,
    Value,
    AdvantageMean,
    AdvantageStd,
    ResponseLength,
    PolicyLoss,
    ToolErrorRate,
    TruncationRate,
}

impl Signal {
    /// Every record column including `Step`, in file order.
    pub const COLUMNS: [Signal; 12] = [
        Signal::Step,
        Signal::Reward,
        Signal::Kl,
        Signal::Entropy,
        Signal::Return,
        Signal::Value,
        Signal::AdvantageMean,
        Signal::AdvantageStd,
        Signal::ResponseLength,
        Signal::PolicyLoss,
        Signal::ToolErrorRate,
        Signal::TruncationRate,
    ];

    /// The eleven measured signals (everything but `Step`).
    pub const ALL: [Signal; 11] = [
        Signal::Reward,
        Signal::Kl,
        Signal::Entropy,
        Signal::Return,
        Signal::Value,
        Signal::AdvantageMean,
        Signal::AdvantageStd,
        Signal::ResponseLength,
        Signal::PolicyLoss,
        Signal::ToolErrorRate,
        Signal::TruncationRate,
    ];

    /// Field name in the run file.
    pub fn name(self) -> &'static str {
        match self {
            Signal::Step => "step",
            Signal::Reward => "reward_mean",
            Signal::Kl => "kl_mean",
            Signal::Entropy => "entropy_mean",
            Signal::Return => "return_mean",
            Signal::Value => "value_mean",
            Signal::AdvantageMean => "advantage_mean",
            Signal::AdvantageStd => "advantage_std",
            Signal::ResponseLength => "response_length_mean",
            Signal::PolicyLoss => "policy_loss",
            Signal::ToolErrorRate => "tool_error_rate",
            Signal::TruncationRate => "truncation_rate",
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A per-step series derived from a record: one of the measured signals or
/// the gap between value estimate and return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Signal(Signal),
    ValueGap,
}

impl Channel {
    pub const ALL: [Channel; 12] = [
        Channel::Signal(Signal::Reward),
        Channel::Signal(Signal::Kl),
        Channel::Signal(Signal::Entropy),
        Channel::Signal(Signal::Return),
        Channel::Signal(Signal::Value),
        Channel::Signal(Signal::AdvantageMean),
        Channel::Signal(Signal::AdvantageStd),
        Channel::Signal(Signal::ResponseLength),
        Channel::Signal(Signal::PolicyLoss),
        Channel::Signal(Signal::ToolErrorRate),
        Channel::Signal(Signal::TruncationRate),
        Channel::ValueGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Signal(s) => s.name(),
            Channel::ValueGap => "value_return_gap",
        }
    }

    pub fn value(self, rec: &TrainStepRecord) -> f64 {
        match self {
            Channel::Signal(s) => rec.get(s),
            Channel::ValueGap => rec.value_mean - rec.return_mean,
        }
    }

    /// The series of this channel over `records`.
    pub fn series(self, records: &[TrainStepRecord]) -> Vec<f64> {
        records.iter().map(|r| self.value(r)).collect()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
