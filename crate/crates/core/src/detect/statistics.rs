use crate::model::{Channel, Signal, TrainStepRecord};
use crate::stats;

/// The five training invariants. Statistics are grouped by invariant and a
/// run's severity on an invariant is its largest statistic deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Invariant {
    RewardConsistency,
    KlDynamics,
    EntropyProfile,
    ReturnStability,
    GenerationQuality,
}

impl Invariant {
    pub const ALL: [Invariant; 5] = [
        Invariant::RewardConsistency,
        Invariant::KlDynamics,
        Invariant::EntropyProfile,
        Invariant::ReturnStability,
        Invariant::GenerationQuality,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Invariant::RewardConsistency => "reward_consistency",
            Invariant::KlDynamics => "kl_dynamics",
            Invariant::EntropyProfile => "entropy_profile",
            Invariant::ReturnStability => "return_stability",
            Invariant::GenerationQuality => "generation_quality",
        }
    }
}

/// Run-level statistics summarised over the first `horizon` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    RewardMean,
    RewardSlope,
    RewardGain,
    KlMean,
    KlMax,
    KlSlope,
    EntropyMean,
    EntropySlope,
    EntropyFinal,
    ReturnStd,
    ValueGapMean,
    AdvantageStdMean,
    AdvantageMeanStd,
    LengthMean,
    LengthStd,
    ToolErrorMean,
    TruncationMean,
    PolicyLossMean,
}

impl Statistic {
    pub const ALL: [Statistic; 18] = [
        Statistic::RewardMean,
        Statistic::RewardSlope,
        Statistic::RewardGain,
        Statistic::KlMean,
        Statistic::KlMax,
        Statistic::KlSlope,
        Statistic::EntropyMean,
        Statistic::EntropySlope,
        Statistic::EntropyFinal,
        Statistic::ReturnStd,
        Statistic::ValueGapMean,
        Statistic::AdvantageStdMean,
        Statistic::AdvantageMeanStd,
        Statistic::LengthMean,
        Statistic::LengthStd,
        Statistic::ToolErrorMean,
        Statistic::TruncationMean,
        Statistic::PolicyLossMean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::RewardMean => "reward_mean",
            Statistic::RewardSlope => "reward_slope",
            Statistic::RewardGain => "reward_gain",
            Statistic::KlMean => "kl_mean",
            Statistic::KlMax => "kl_max",
            Statistic::KlSlope => "kl_slope",
            Statistic::EntropyMean => "entropy_mean",
            Statistic::EntropySlope => "entropy_slope",
            Statistic::EntropyFinal => "entropy_final",
            Statistic::ReturnStd => "return_std",
            Statistic::ValueGapMean => "value_gap_abs_mean",
            Statistic::AdvantageStdMean => "advantage_std_mean",
            Statistic::AdvantageMeanStd => "advantage_mean_std",
            Statistic::LengthMean => "response_length_mean",
            Statistic::LengthStd => "response_length_std",
            Statistic::ToolErrorMean => "tool_error_rate_mean",
            Statistic::TruncationMean => "truncation_rate_mean",
            Statistic::PolicyLossMean => "policy_loss_mean",
        }
    }

    pub fn invariant(self) -> Invariant {
        use Statistic::*;
        match self {
            RewardMean | RewardSlope | RewardGain => Invariant::RewardConsistency,
            KlMean | KlMax | KlSlope => Invariant::KlDynamics,
            EntropyMean | EntropySlope | EntropyFinal => Invariant::EntropyProfile,
            ReturnStd | ValueGapMean | AdvantageStdMean | AdvantageMeanStd => {
                Invariant::ReturnStability
            }
            LengthMean | LengthStd | ToolErrorMean | TruncationMean | PolicyLossMean => {
                Invariant::GenerationQuality
            }
        }
    }

    pub fn compute(self, records: &[TrainStepRecord]) -> f64 {
        let s = |sig: Signal| Channel::Signal(sig).series(records);
        match self {
            Statistic::RewardMean => stats::mean(&s(Signal::Reward)),
            Statistic::RewardSlope => stats::slope(&s(Signal::Reward)),
            Statistic::RewardGain => {
                let r = s(Signal::Reward);
                r.last().copied().unwrap_or(0.0) - r.first().copied().unwrap_or(0.0)
            }
            Statistic::KlMean => stats::mean(&s(Signal::Kl)),
            Statistic::KlMax => s(Signal::Kl).into_iter().fold(0.0, f64::max),
            Statistic::KlSlope => stats::slope(&s(Signal::Kl)),
            Statistic::EntropyMean => stats::mean(&s(Signal::Entropy)),
            Statistic::EntropySlope => stats::slope(&s(Signal::Entropy)),
            Statistic::EntropyFinal => records.last().map_or(0.0, |r| r.entropy_mean),
            Statistic::ReturnStd => stats::std_dev(&s(Signal::Return)),
            Statistic::ValueGapMean => {
                let gap: Vec<f64> = Channel::ValueGap
                    .series(records)
                    .iter()
                    .map(|g| g.abs())
                    .collect();
                stats::mean(&gap)
            }
            Statistic::AdvantageStdMean => stats::mean(&s(Signal::AdvantageStd)),
            Statistic::AdvantageMeanStd => stats::std_dev(&s(Signal::AdvantageMean)),
            Statistic::LengthMean => stats::mean(&s(Signal::ResponseLength)),
            Statistic::LengthStd => stats::std_dev(&s(Signal::ResponseLength)),
            Statistic::ToolErrorMean => stats::mean(&s(Signal::ToolErrorRate)),
            Statistic::TruncationMean => stats::mean(&s(Signal::TruncationRate)),
            Statistic::PolicyLossMean => stats::mean(&s(Signal::PolicyLoss)),
        }
    }
}

/// All eighteen statistics of `records`, in [`Statistic::ALL`] order.
pub fn run_statistics(records: &[TrainStepRecord]) -> Vec<f64> {
    Statistic::ALL.iter().map(|s| s.compute(records)).collect()
}

/// Plain per-signal means of `records`, in [`Signal::ALL`] order.
pub fn signal_means(records: &[TrainStepRecord]) -> Vec<f64> {
    Signal::ALL
        .iter()
        .map(|&sig| stats::mean(&Channel::Signal(sig).series(records)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_are_three_three_three_four_five() {
        let mut counts = [0; 5];
        for s in Statistic::ALL {
            counts[s.invariant().index()] += 1;
        }
        assert_eq!(counts, [3, 3, 3, 4, 5]);
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = Statistic::ALL.iter().map(|s| s.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 18);
    }
}
