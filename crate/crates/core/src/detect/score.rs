use serde::{Deserialize, Serialize};

use crate::model::{Signal, TrainingRun};
use crate::stats;

use super::profile::{NormalProfile, MIN_CALIBRATION_RUNS};
use super::statistics::{run_statistics, signal_means, Invariant, Statistic};
use super::{check_length, DetectError};

/// Ablation switches for the detector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectOptions {
    /// Score raw statistics against location 0 and scale 1 instead of the
    /// calibrated profile.
    pub no_calibration: bool,
    /// Replace the invariant statistics with raw per-signal means in a
    /// single group.
    pub no_invariants: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationEntry {
    pub name: String,
    pub group: usize,
    pub value: f64,
}

/// Non-negative deviations of one run, each assigned to an invariant group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationVector {
    pub entries: Vec<DeviationEntry>,
    pub group_count: usize,
}

impl DeviationVector {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityScore {
    pub per_invariant: Vec<f64>,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyDecision {
    pub severity: SeverityScore,
    pub threshold: f64,
    pub is_anomalous: bool,
}

/// Deviations of the run's first `horizon` steps from the profile.
pub fn extract_deviations(
    run: &TrainingRun,
    profile: &NormalProfile,
    horizon: usize,
) -> Result<DeviationVector, DetectError> {
    extract_deviations_with(run, profile, horizon, DetectOptions::default())
}

pub fn extract_deviations_with(
    run: &TrainingRun,
    profile: &NormalProfile,
    horizon: usize,
    opts: DetectOptions,
) -> Result<DeviationVector, DetectError> {
    if profile.horizon != horizon {
        return Err(DetectError::HorizonMismatch {
            profile: profile.horizon,
            requested: horizon,
        });
    }
    check_length(run, horizon)?;
    let window = &run.steps()[..horizon];
    if opts.no_invariants {
        let entries = Signal::ALL
            .iter()
            .zip(signal_means(window))
            .map(|(s, m)| DeviationEntry {
                name: s.name().to_string(),
                group: 0,
                value: m.abs(),
            })
            .collect();
        return Ok(DeviationVector {
            entries,
            group_count: 1,
        });
    }
    let values = run_statistics(window);
    let mut entries = Vec::with_capacity(Statistic::ALL.len());
    for (s, x) in Statistic::ALL.iter().zip(values) {
        let (loc, scale) = if opts.no_calibration {
            (0.0, 1.0)
        } else {
            let st = profile.statistic(*s)?;
            (st.location, st.scale)
        };
        entries.push(DeviationEntry {
            name: s.name().to_string(),
            group: s.invariant().index(),
            value: (x - loc).abs() / scale,
        });
    }
    Ok(DeviationVector {
        entries,
        group_count: Invariant::ALL.len(),
    })
}

/// Per-group maxima and their mean.
pub fn score(dev: &DeviationVector) -> SeverityScore {
    let mut per_invariant = vec![0.0f64; dev.group_count];
    for e in &dev.entries {
        per_invariant[e.group] = per_invariant[e.group].max(e.value);
    }
    let overall = stats::mean(&per_invariant);
    SeverityScore {
        per_invariant,
        overall,
    }
}

/// Severity of one run.
pub fn severity(
    run: &TrainingRun,
    profile: &NormalProfile,
    horizon: usize,
    opts: DetectOptions,
) -> Result<SeverityScore, DetectError> {
    Ok(score(&extract_deviations_with(
        run, profile, horizon, opts,
    )?))
}

/// `mean + k * std` of the given normal severities (population std,
/// floored at 1e-6).
pub fn threshold_from_scores(scores: &[f64], k: f64) -> f64 {
    stats::mean(scores) + k * stats::std_dev(scores).max(stats::SCALE_FLOOR)
}

pub fn compute_threshold(
    profile: &NormalProfile,
    normal_runs: &[TrainingRun],
    k: f64,
    horizon: usize,
    opts: DetectOptions,
) -> Result<f64, DetectError> {
    if normal_runs.len() < MIN_CALIBRATION_RUNS {
        return Err(DetectError::TooFewRuns {
            needed: MIN_CALIBRATION_RUNS,
            got: normal_runs.len(),
        });
    }
    let scores: Vec<f64> = normal_runs
        .iter()
        .map(|r| severity(r, profile, horizon, opts).map(|s| s.overall))
        .collect::<Result<_, _>>()?;
    Ok(threshold_from_scores(&scores, k))
}

pub fn detect(
    run: &TrainingRun,
    profile: &NormalProfile,
    threshold: f64,
    horizon: usize,
    opts: DetectOptions,
) -> Result<AnomalyDecision, DetectError> {
    let severity = severity(run, profile, horizon, opts)?;
    let is_anomalous = severity.overall > threshold;
    Ok(AnomalyDecision {
        severity,
        threshold,
        is_anomalous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dev(groups: &[(usize, f64)], count: usize) -> DeviationVector {
        DeviationVector {
            entries: groups
                .iter()
                .enumerate()
                .map(|(i, &(g, v))| DeviationEntry {
                    name: format!("s{i}"),
                    group: g,
                    value: v,
                })
                .collect(),
            group_count: count,
        }
    }

    #[test]
    fn zero_vector_scores_zero() {
        assert_eq!(score(&dev(&[(0, 0.0), (4, 0.0)], 5)).overall, 0.0);
    }

    #[test]
    fn single_invariant_averages_over_five() {
        let s = score(&dev(&[(0, 5.0), (0, 2.0)], 5));
        assert_eq!(s.per_invariant, vec![5.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.overall, 1.0);
    }

    #[test]
    fn threshold_arithmetic() {
        assert_eq!(
            threshold_from_scores(&[1.0, 1.0, 1.0], 2.0),
            1.0 + 2.0 * 1e-6
        );
        assert_eq!(threshold_from_scores(&[0.0, 2.0], 2.0), 3.0);
    }
}
