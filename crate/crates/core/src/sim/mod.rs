//! Deterministic generator of healthy reinforcement fine-tuning dynamics.
//!
//! Faults are expressed as a [`Perturbation`] of the healthy laws, so a
//! strength-zero fault reproduces the healthy run exactly.

mod config;
mod generator;
pub mod rng;

pub use config::{healthy_defaults, SimConfig};
pub use generator::{
    advantage_std_law, entropy_law, generate, kl_law, length_law, policy_loss_law, reward_law,
    simulate_healthy, NoiseScale, Perturbation, StepPerturbation,
};
pub use rng::{derive_seed, RngStream};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
}
