use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attribute::temporal::{self, TEMPORAL_DIM};
use crate::model::{Channel, Signal, TrainingRun};
use crate::stats;

use super::statistics::{run_statistics, signal_means, Statistic};
use super::DetectError;

/// Fewest normal runs a profile can be calibrated from.
pub const MIN_CALIBRATION_RUNS: usize = 3;

/// Median and scaled MAD of one quantity over the calibration runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustStat {
    pub location: f64,
    pub scale: f64,
}

impl RobustStat {
    pub fn of(values: &[f64]) -> Self {
        let (location, scale) = stats::robust_location_scale(values);
        RobustStat { location, scale }
    }

    pub fn z(&self, x: f64) -> f64 {
        (x - self.location) / self.scale
    }
}

/// Per-step median of one channel across the calibration runs, with one
/// pooled scale shared by every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelBand {
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
    /// Median over runs of the mean absolute step-to-step change.
    pub step_delta_mean: f64,
}

impl ChannelBand {
    /// Robust z of `x` at step `t`. Steps past the band reuse its last entry.
    pub fn z(&self, t: usize, x: f64) -> f64 {
        let i = t.min(self.location.len().saturating_sub(1));
        (x - self.location[i]) / self.scale[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedStat {
    pub name: String,
    pub location: f64,
    pub scale: f64,
}

/// Reference description of healthy training dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalProfile {
    pub horizon: usize,
    pub run_count: usize,
    /// The eighteen run-level statistics, keyed by name.
    pub statistics: BTreeMap<String, RobustStat>,
    /// Plain per-signal means, keyed by field name.
    pub signal_means: BTreeMap<String, RobustStat>,
    /// Per-step bands keyed by channel name, as long as the shortest
    /// calibration run.
    pub bands: BTreeMap<String, ChannelBand>,
    /// Temporal feature location/scale, in feature order.
    pub temporal: Vec<NamedStat>,
}

impl NormalProfile {
    pub fn statistic(&self, s: Statistic) -> Result<RobustStat, DetectError> {
        self.statistics
            .get(s.name())
            .copied()
            .ok_or_else(|| DetectError::MissingStatistic(s.name().to_string()))
    }

    pub fn signal_mean(&self, s: Signal) -> Result<RobustStat, DetectError> {
        self.signal_means
            .get(s.name())
            .copied()
            .ok_or_else(|| DetectError::MissingStatistic(s.name().to_string()))
    }

    pub fn band(&self, c: Channel) -> Result<&ChannelBand, DetectError> {
        self.bands
            .get(c.name())
            .ok_or_else(|| DetectError::MissingStatistic(format!("band {}", c.name())))
    }

    pub fn save(&self, path: &Path) -> Result<(), DetectError> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| DetectError::Format(e.to_string()))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| DetectError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, DetectError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DetectError::Io(format!("{}: {e}", path.display())))?;
        let p: NormalProfile =
            serde_json::from_str(&text).map_err(|e| DetectError::Format(e.to_string()))?;
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<(), DetectError> {
        for s in Statistic::ALL {
            let st = self.statistic(s)?;
            if !(st.scale > 0.0) {
                return Err(DetectError::Format(format!(
                    "scale of {} must be positive",
                    s.name()
                )));
            }
        }
        if self.temporal.len() != TEMPORAL_DIM {
            return Err(DetectError::Format(format!(
                "expected {TEMPORAL_DIM} temporal entries, found {}",
                self.temporal.len()
            )));
        }
        for c in Channel::ALL {
            self.band(c)?;
        }
        Ok(())
    }
}

/// Builds a profile from healthy runs, summarising each over its first
/// `horizon` steps.
pub fn calibrate(
    normal_runs: &[TrainingRun],
    horizon: usize,
) -> Result<NormalProfile, DetectError> {
    if normal_runs.len() < MIN_CALIBRATION_RUNS {
        return Err(DetectError::TooFewRuns {
            needed: MIN_CALIBRATION_RUNS,
            got: normal_runs.len(),
        });
    }
    if horizon == 0 {
        return Err(DetectError::InvalidHorizon(horizon));
    }
    for run in normal_runs {
        super::check_length(run, horizon)?;
    }
    let windows: Vec<_> = normal_runs.iter().map(|r| &r.steps()[..horizon]).collect();

    let stat_rows: Vec<Vec<f64>> = windows.iter().map(|w| run_statistics(w)).collect();
    let statistics = Statistic::ALL
        .iter()
        .enumerate()
        .map(|(k, s)| (s.name().to_string(), RobustStat::of(&column(&stat_rows, k))))
        .collect();

    let mean_rows: Vec<Vec<f64>> = windows.iter().map(|w| signal_means(w)).collect();
    let signal_means = Signal::ALL
        .iter()
        .enumerate()
        .map(|(k, s)| (s.name().to_string(), RobustStat::of(&column(&mean_rows, k))))
        .collect();

    let band_len = normal_runs.iter().map(|r| r.len()).min().unwrap_or(0);
    let bands: BTreeMap<String, ChannelBand> = Channel::ALL
        .iter()
        .map(|&c| (c.name().to_string(), channel_band(normal_runs, c, band_len)))
        .collect();

    let mut profile = NormalProfile {
        horizon,
        run_count: normal_runs.len(),
        statistics,
        signal_means,
        bands,
        temporal: Vec::new(),
    };
    let temporal_rows: Vec<Vec<f64>> = windows
        .iter()
        .map(|w| temporal::raw_features(w, &profile))
        .collect::<Result<_, _>>()?;
    profile.temporal = temporal::feature_names()
        .into_iter()
        .enumerate()
        .map(|(k, name)| {
            let st = RobustStat::of(&column(&temporal_rows, k));
            // onsets are whole steps and usually absent (-1) in every normal
            // run; a finer scale would turn any onset into a huge jump
            let scale = if name.ends_with(temporal::ONSET_SUFFIX) {
                st.scale.max(1.0)
            } else {
                st.scale
            };
            NamedStat {
                name,
                location: st.location,
                scale,
            }
        })
        .collect();
    Ok(profile)
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

fn channel_band(runs: &[TrainingRun], c: Channel, len: usize) -> ChannelBand {
    let location: Vec<f64> = (0..len)
        .map(|t| {
            let xs: Vec<f64> = runs.iter().map(|r| c.value(&r.steps()[t])).collect();
            stats::median(&xs)
        })
        .collect();
    // A handful of runs gives a noisy scale at any single step; the
    // healthy noise level is roughly constant, so pool the residuals.
    let residuals: Vec<f64> = runs
        .iter()
        .flat_map(|r| {
            (0..len)
                .map(|t| c.value(&r.steps()[t]) - location[t])
                .collect::<Vec<_>>()
        })
        .collect();
    let (_, pooled) = stats::robust_location_scale(&residuals);
    let scale = vec![pooled; len];
    let deltas: Vec<f64> = runs
        .iter()
        .map(|r| {
            let d: Vec<f64> = stats::diffs(&c.series(&r.steps()[..len]))
                .iter()
                .map(|x| x.abs())
                .collect();
            stats::mean(&d)
        })
        .collect();
    ChannelBand {
        location,
        scale,
        step_delta_mean: stats::median(&deltas).max(stats::SCALE_FLOOR),
    }
}
