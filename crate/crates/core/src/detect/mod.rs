//! Run-level anomaly detection by invariant deviations.
//!
//! A [`NormalProfile`] is calibrated from healthy runs. Each run is then
//! summarised by eighteen statistics grouped under five invariants; the
//! severity is the mean over invariants of the largest robust z in each.

mod profile;
mod score;
mod statistics;

pub use profile::{
    calibrate, ChannelBand, NamedStat, NormalProfile, RobustStat, MIN_CALIBRATION_RUNS,
};
pub use score::{
    compute_threshold, detect, extract_deviations, extract_deviations_with, score, severity,
    threshold_from_scores, AnomalyDecision, DetectOptions, DeviationEntry, DeviationVector,
    SeverityScore,
};
pub use statistics::{run_statistics, signal_means, Invariant, Statistic};

use crate::model::TrainingRun;

/// Default threshold coefficient.
pub const DEFAULT_K: f64 = 2.0;
/// Default detection horizon in steps.
pub const DEFAULT_HORIZON: usize = 20;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DetectError {
    #[error("need at least {needed} normal runs, got {got}")]
    TooFewRuns { needed: usize, got: usize },
    #[error("run {run_id} has {len} steps, horizon is {horizon}")]
    RunTooShort {
        run_id: String,
        len: usize,
        horizon: usize,
    },
    #[error("profile was calibrated at horizon {profile}, requested {requested}")]
    HorizonMismatch { profile: usize, requested: usize },
    #[error("invalid horizon {0}")]
    InvalidHorizon(usize),
    #[error("profile has no entry for {0}")]
    MissingStatistic(String),
    #[error("{0}")]
    Io(String),
    #[error("bad profile file: {0}")]
    Format(String),
}

/// Fails with `RunTooShort` when the run is shorter than `horizon`.
pub fn check_length(run: &TrainingRun, horizon: usize) -> Result<(), DetectError> {
    if run.len() < horizon {
        return Err(DetectError::RunTooShort {
            run_id: run.run_id().to_string(),
            len: run.len(),
            horizon,
        });
    }
    Ok(())
}
