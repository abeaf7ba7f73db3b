use serde::{Deserialize, Serialize};

use crate::detect::{extract_deviations, score, Invariant, NormalProfile, Statistic};
use crate::model::TrainingRun;

use super::temporal::{feature_names, temporal_features, TEMPORAL_DIM};
use super::AttributeError;

pub const DEVIATION_DIM: usize = 18;
pub const INVARIANT_DIM: usize = 5;
pub const FINGERPRINT_DIM: usize = TEMPORAL_DIM + DEVIATION_DIM + INVARIANT_DIM;

/// Names of the full fingerprint's coordinates.
pub fn fingerprint_feature_names() -> Vec<String> {
    let mut names = feature_names();
    names.extend(Statistic::ALL.iter().map(|s| s.name().to_string()));
    names.extend(Invariant::ALL.iter().map(|i| format!("phi_{}", i.name())));
    names
}

/// Ablation switches for fingerprint construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintOptions {
    /// Zero the temporal block.
    pub no_temporal: bool,
    /// Keep only the eighteen deviations.
    pub no_fingerprint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultFingerprint {
    pub values: Vec<f64>,
}

impl FaultFingerprint {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Sign-preserving `ln(1 + |x|)`. Fault deviations span several orders of
/// magnitude; compressing them keeps one extreme coordinate from swamping
/// the distance.
pub fn signed_log(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

pub fn fingerprint(
    run: &TrainingRun,
    profile: &NormalProfile,
    horizon: usize,
) -> Result<FaultFingerprint, AttributeError> {
    fingerprint_with(run, profile, horizon, FingerprintOptions::default())
}

/// Temporal features standardized against the profile, then the deviation
/// vector, then the per-invariant scores, all passed through [`signed_log`].
pub fn fingerprint_with(
    run: &TrainingRun,
    profile: &NormalProfile,
    horizon: usize,
    opts: FingerprintOptions,
) -> Result<FaultFingerprint, AttributeError> {
    let dev = extract_deviations(run, profile, horizon)?;
    if opts.no_fingerprint {
        return Ok(FaultFingerprint {
            values: dev.values().into_iter().map(signed_log).collect(),
        });
    }
    let temporal = temporal_features(run, profile, horizon)?;
    let mut values = Vec::with_capacity(FINGERPRINT_DIM);
    if opts.no_temporal {
        values.resize(TEMPORAL_DIM, 0.0);
    } else {
        if profile.temporal.len() != TEMPORAL_DIM {
            return Err(AttributeError::DimensionMismatch {
                expected: TEMPORAL_DIM,
                found: profile.temporal.len(),
            });
        }
        for (x, st) in temporal.values.iter().zip(&profile.temporal) {
            values.push(signed_log((x - st.location) / st.scale));
        }
    }
    values.extend(dev.values().into_iter().map(signed_log));
    values.extend(score(&dev).per_invariant.into_iter().map(signed_log));
    Ok(FaultFingerprint { values })
}
