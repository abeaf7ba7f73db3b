use serde::{Deserialize, Serialize};

use super::SimError;

/// Parameters of the healthy training-dynamics generator.
///
/// Signal laws (before noise):
/// reward rises exponentially from `reward_start` toward `reward_ceiling`;
/// entropy decays from `entropy_start` toward `entropy_floor`; KL drifts
/// linearly from `kl_base`; response length relaxes from `length_start`
/// toward `length_target`; policy loss decays geometrically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub steps: usize,
    pub reward_start: f64,
    pub reward_ceiling: f64,
    pub reward_timescale: f64,
    pub reward_noise: f64,
    pub kl_base: f64,
    pub kl_drift: f64,
    pub kl_noise: f64,
    pub entropy_start: f64,
    pub entropy_floor: f64,
    pub entropy_timescale: f64,
    pub entropy_noise: f64,
    pub length_start: f64,
    pub length_target: f64,
    pub length_timescale: f64,
    pub length_noise: f64,
    pub return_noise: f64,
    pub value_lag: usize,
    pub value_noise: f64,
    pub advantage_scale: f64,
    /// The std law is `advantage_scale * (1 - t / advantage_decay_steps)`,
    /// independent of run length.
    pub advantage_decay_steps: f64,
    pub advantage_noise: f64,
    pub advantage_std_noise: f64,
    pub tool_error_base: f64,
    pub truncation_base: f64,
    pub rate_noise: f64,
    pub loss_start: f64,
    pub loss_decay: f64,
    pub loss_noise: f64,
}

impl SimConfig {
    /// The committed healthy configuration (20 steps).
    pub fn healthy_defaults() -> Self {
        SimConfig {
            steps: 20,
            reward_start: 0.10,
            reward_ceiling: 0.85,
            reward_timescale: 8.0,
            reward_noise: 0.03,
            kl_base: 0.02,
            kl_drift: 0.0005,
            kl_noise: 0.004,
            entropy_start: 1.2,
            entropy_floor: 0.4,
            entropy_timescale: 25.0,
            entropy_noise: 0.02,
            length_start: 180.0,
            length_target: 220.0,
            length_timescale: 10.0,
            length_noise: 10.0,
            return_noise: 0.02,
            value_lag: 1,
            value_noise: 0.02,
            advantage_scale: 0.5,
            advantage_decay_steps: 60.0,
            advantage_noise: 0.05,
            advantage_std_noise: 0.01,
            tool_error_base: 0.02,
            truncation_base: 0.01,
            rate_noise: 0.005,
            loss_start: 0.6,
            loss_decay: 0.92,
            loss_noise: 0.02,
        }
    }

    /// Defaults with a different run length.
    pub fn with_steps(steps: usize) -> Self {
        SimConfig {
            steps,
            ..Self::healthy_defaults()
        }
    }

    /// Every `*_noise` field set to zero.
    pub fn noiseless(&self) -> Self {
        SimConfig {
            reward_noise: 0.0,
            kl_noise: 0.0,
            entropy_noise: 0.0,
            length_noise: 0.0,
            return_noise: 0.0,
            value_noise: 0.0,
            advantage_noise: 0.0,
            advantage_std_noise: 0.0,
            rate_noise: 0.0,
            loss_noise: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |what: &str| Err(SimError::InvalidConfig(what.to_string()));
        if self.steps == 0 {
            return fail("steps must be positive");
        }
        if !(self.reward_start < self.reward_ceiling) {
            return fail("reward_start must be below reward_ceiling");
        }
        if !(self.entropy_floor < self.entropy_start) || self.entropy_floor < 0.0 {
            return fail("entropy_floor must be in [0, entropy_start)");
        }
        for (v, name) in [
            (self.reward_timescale, "reward_timescale"),
            (self.entropy_timescale, "entropy_timescale"),
            (self.length_timescale, "length_timescale"),
            (self.advantage_decay_steps, "advantage_decay_steps"),
            (self.length_start, "length_start"),
            (self.length_target, "length_target"),
        ] {
            if !(v > 0.0) {
                return fail(&format!("{name} must be positive"));
            }
        }
        for (v, name) in [
            (self.reward_noise, "reward_noise"),
            (self.kl_noise, "kl_noise"),
            (self.entropy_noise, "entropy_noise"),
            (self.length_noise, "length_noise"),
            (self.return_noise, "return_noise"),
            (self.value_noise, "value_noise"),
            (self.advantage_noise, "advantage_noise"),
            (self.advantage_std_noise, "advantage_std_noise"),
            (self.rate_noise, "rate_noise"),
            (self.loss_noise, "loss_noise"),
            (self.kl_base, "kl_base"),
            (self.advantage_scale, "advantage_scale"),
        ] {
            if !(v >= 0.0) {
                return fail(&format!("{name} must be non-negative"));
            }
        }
        for (v, name) in [
            (self.tool_error_base, "tool_error_base"),
            (self.truncation_base, "truncation_base"),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.loss_decay > 0.0 && self.loss_decay < 1.0) {
            return fail("loss_decay must lie in (0, 1)");
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::healthy_defaults()
    }
}

/// The committed healthy configuration.
pub fn healthy_defaults() -> SimConfig {
    SimConfig::healthy_defaults()
}
