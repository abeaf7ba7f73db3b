//! Failure management for reinforcement fine-tuning runs.
//!
//! The crate covers the whole loop on step-level training telemetry:
//!
//! - [`sim`] generates healthy training dynamics from a seed;
//! - [`inject`] schedules and applies the sixteen fault types, verifies that
//!   each injected run shows its signature, and curates a labelled benchmark;
//! - [`detect`] calibrates a normal profile and scores runs by invariant
//!   deviations;
//! - [`attribute`] builds temporal fingerprints and attributes faults with a
//!   nearest-centroid model;
//! - [`remediate`] plans configuration changes, re-simulates the run and
//!   checks whether severity went down;
//! - [`eval`] runs the cross-validated evaluation protocol.

pub mod attribute;
pub mod detect;
pub mod eval;
pub mod inject;
pub mod model;
pub mod remediate;
pub mod sim;
pub mod stats;

pub use model::{
    parse_run, serialize_run, DifficultyRegime, FaultFamily, FaultLabel, FaultType,
    InjectionSchedule, RunError, ScheduleMode, Signal, TrainStepRecord, TrainingRun,
};
