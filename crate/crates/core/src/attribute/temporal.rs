use serde::{Deserialize, Serialize};

use crate::detect::{check_length, DetectError, NormalProfile};
use crate::model::{Channel, Signal, TrainStepRecord, TrainingRun};
use crate::stats;

use super::AttributeError;

/// Features per channel: early, mid and late window means, slope,
/// fluctuation and onset.
pub const PER_CHANNEL: usize = 6;
pub const CROSS_TERMS: usize = 3;
pub const TEMPORAL_DIM: usize = Channel::ALL.len() * PER_CHANNEL + CROSS_TERMS;
/// Shortest horizon with three non-empty windows.
pub const MIN_HORIZON: usize = 6;
/// Robust z beyond which a step counts as departed from the profile.
pub const ONSET_Z: f64 = 2.0;

/// Temporal summary of one run's first `horizon` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalRepr {
    pub values: Vec<f64>,
}

impl TemporalRepr {
    /// Value of `feature` ("early", "mid", "late", "slope", "fluctuation"
    /// or "onset") for `channel`.
    pub fn get(&self, channel: Channel, feature: &str) -> Option<f64> {
        let c = Channel::ALL.iter().position(|&x| x == channel)?;
        let f = FEATURES.iter().position(|&x| x == feature)?;
        Some(self.values[c * PER_CHANNEL + f])
    }

    pub fn cross(&self) -> &[f64] {
        &self.values[TEMPORAL_DIM - CROSS_TERMS..]
    }
}

const FEATURES: [&str; PER_CHANNEL] = ["early", "mid", "late", "slope", "fluctuation", "onset"];
/// Name suffix of the onset features.
pub(crate) const ONSET_SUFFIX: &str = "_onset";

/// Feature names in representation order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(TEMPORAL_DIM);
    for c in Channel::ALL {
        for f in FEATURES {
            names.push(format!("{}_{f}", c.name()));
        }
    }
    names.extend(
        [
            "corr_reward_return",
            "corr_reward_entropy",
            "corr_kl_length",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    names
}

pub fn temporal_features(
    run: &TrainingRun,
    profile: &NormalProfile,
    horizon: usize,
) -> Result<TemporalRepr, AttributeError> {
    if horizon < MIN_HORIZON {
        return Err(AttributeError::HorizonTooSmall(horizon));
    }
    check_length(run, horizon)?;
    Ok(TemporalRepr {
        values: raw_features(&run.steps()[..horizon], profile)?,
    })
}

/// Temporal features of `window` (already cut to the horizon).
pub(crate) fn raw_features(
    window: &[TrainStepRecord],
    profile: &NormalProfile,
) -> Result<Vec<f64>, DetectError> {
    let h = window.len();
    let (a, b) = (h / 3, 2 * h / 3);
    let mut out = Vec::with_capacity(TEMPORAL_DIM);
    for c in Channel::ALL {
        let xs = c.series(window);
        out.push(stats::mean(&xs[..a]));
        out.push(stats::mean(&xs[a..b]));
        out.push(stats::mean(&xs[b..]));
        out.push(stats::slope(&xs));
        out.push(stats::std_dev(&stats::diffs(&xs)));
        let band = profile.band(c)?;
        out.push(onset(&xs, |t, x| band.z(t, x)));
    }
    let s = |sig| Channel::Signal(sig).series(window);
    out.push(stats::correlation(&s(Signal::Reward), &s(Signal::Return)));
    out.push(stats::correlation(&s(Signal::Reward), &s(Signal::Entropy)));
    out.push(stats::correlation(
        &s(Signal::Kl),
        &s(Signal::ResponseLength),
    ));
    Ok(out)
}

/// First step of the first pair of consecutive steps whose |z| exceeds
/// [`ONSET_Z`]; an exceedance on the final step also counts. −1 if none.
fn onset(xs: &[f64], z: impl Fn(usize, f64) -> f64) -> f64 {
    let hot: Vec<bool> = xs
        .iter()
        .enumerate()
        .map(|(t, &x)| z(t, x).abs() > ONSET_Z)
        .collect();
    let n = hot.len();
    (0..n)
        .find(|&t| hot[t] && (t + 1 == n || hot[t + 1]))
        .map_or(-1.0, |t| t as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_seventy_five() {
        assert_eq!(TEMPORAL_DIM, 75);
        assert_eq!(feature_names().len(), 75);
    }

    #[test]
    fn onset_needs_two_steps() {
        let z = |_: usize, x: f64| x;
        assert_eq!(onset(&[0.0, 3.0, 0.0, 3.0, 3.0], z), 3.0);
        assert_eq!(onset(&[0.0, 0.0, 3.0], z), 2.0);
        assert_eq!(onset(&[0.0, 3.0, 0.0], z), -1.0);
    }
}
