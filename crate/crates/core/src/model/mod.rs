//! Shared data types: the fault taxonomy, step records, runs and the run file
//! format.

mod format;
mod label;
mod record;
mod run;
mod schedule;

pub use format::{parse_run, serialize_run, SCHEMA_VERSION};
pub use label::{DifficultyRegime, FaultFamily, FaultLabel, FaultType};
pub use record::{Channel, Signal, TrainStepRecord};
pub use run::TrainingRun;
pub use schedule::{InjectionSchedule, ScheduleMode};

/// Errors raised while constructing or parsing runs.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum RunError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("non-contiguous steps at line {line}: expected step {expected}, found {found}")]
    NonContiguousSteps {
        line: usize,
        expected: u64,
        found: u64,
    },
    #[error("label mismatch at line {line}: type {fault_type} does not belong to family {family}")]
    LabelFamilyMismatch {
        line: usize,
        family: String,
        fault_type: String,
    },
    #[error("run has no step records")]
    EmptyRun,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("invalid run: {0}")]
    Invalid(String),
}
