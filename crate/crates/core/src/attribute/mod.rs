//! Fault attribution from temporal fingerprints.

mod centroid;
mod fingerprint;
pub mod temporal;

pub use centroid::{
    attribute, attribute_standardized, fit_attributor, Attribution, AttributionModel,
    ClassCentroid, Granularity,
};
pub use fingerprint::{
    fingerprint, fingerprint_feature_names, fingerprint_with, signed_log, FaultFingerprint,
    FingerprintOptions, DEVIATION_DIM, FINGERPRINT_DIM, INVARIANT_DIM,
};
pub use temporal::{feature_names, temporal_features, TemporalRepr, TEMPORAL_DIM};

use crate::detect::DetectError;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum AttributeError {
    #[error("horizon {0} is too small for three temporal windows")]
    HorizonTooSmall(usize),
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no training examples")]
    EmptyTrainingSet,
    #[error("empty class: {0}")]
    EmptyClass(String),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("{0}")]
    Io(String),
    #[error("bad model file: {0}")]
    Format(String),
}
