use crate::model::{FaultLabel, Signal, TrainStepRecord, TrainingRun};

use super::rng::{streams, RngStream};
use super::SimConfig;

/// Multipliers applied to each signal's noise amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseScale {
    pub reward: f64,
    pub kl: f64,
    pub entropy: f64,
    pub length: f64,
    pub ret: f64,
    pub value: f64,
    pub advantage_mean: f64,
    pub advantage_std: f64,
    pub policy_loss: f64,
    pub tool_error: f64,
    pub truncation: f64,
}

impl NoiseScale {
    pub const UNIT: NoiseScale = NoiseScale {
        reward: 1.0,
        kl: 1.0,
        entropy: 1.0,
        length: 1.0,
        ret: 1.0,
        value: 1.0,
        advantage_mean: 1.0,
        advantage_std: 1.0,
        policy_loss: 1.0,
        tool_error: 1.0,
        truncation: 1.0,
    };

    pub fn get_mut(&mut self, signal: Signal) -> Option<&mut f64> {
        Some(match signal {
            Signal::Reward => &mut self.reward,
            Signal::Kl => &mut self.kl,
            Signal::Entropy => &mut self.entropy,
            Signal::ResponseLength => &mut self.length,
            Signal::Return => &mut self.ret,
            Signal::Value => &mut self.value,
            Signal::AdvantageMean => &mut self.advantage_mean,
            Signal::AdvantageStd => &mut self.advantage_std,
            Signal::PolicyLoss => &mut self.policy_loss,
            Signal::ToolErrorRate => &mut self.tool_error,
            Signal::TruncationRate => &mut self.truncation,
            Signal::Step => return None,
        })
    }

    fn combine(&self, other: &NoiseScale) -> NoiseScale {
        NoiseScale {
            reward: self.reward * other.reward,
            kl: self.kl * other.kl,
            entropy: self.entropy * other.entropy,
            length: self.length * other.length,
            ret: self.ret * other.ret,
            value: self.value * other.value,
            advantage_mean: self.advantage_mean * other.advantage_mean,
            advantage_std: self.advantage_std * other.advantage_std,
            policy_loss: self.policy_loss * other.policy_loss,
            tool_error: self.tool_error * other.tool_error,
            truncation: self.truncation * other.truncation,
        }
    }
}

impl Default for NoiseScale {
    fn default() -> Self {
        Self::UNIT
    }
}

/// How one step departs from the healthy laws.
///
/// The default value is the identity: every scale is one and every shift is
/// zero, which reproduces the healthy record bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPerturbation {
    pub reward_scale: f64,
    pub reward_shift: f64,
    /// Observed reward is the healthy reward from this many steps earlier.
    pub reward_lag: usize,
    /// Return follows the unperturbed reward rather than the observed one.
    pub return_from_healthy_reward: bool,
    pub entropy_scale: f64,
    pub entropy_floor_scale: f64,
    pub entropy_timescale_scale: f64,
    pub kl_scale: f64,
    pub length_scale: f64,
    pub policy_loss_scale: f64,
    pub value_shift: f64,
    pub advantage_std_scale: f64,
    pub tool_error_shift: f64,
    pub truncation_shift: f64,
    pub noise: NoiseScale,
    /// Replace reward, KL and length with draws from a wide corrupted range.
    pub corrupt: bool,
    /// Weight pulling every signal (except policy loss) toward the anchor
    /// step's values.
    pub freeze: f64,
}

impl Default for StepPerturbation {
    fn default() -> Self {
        StepPerturbation {
            reward_scale: 1.0,
            reward_shift: 0.0,
            reward_lag: 0,
            return_from_healthy_reward: false,
            entropy_scale: 1.0,
            entropy_floor_scale: 1.0,
            entropy_timescale_scale: 1.0,
            kl_scale: 1.0,
            length_scale: 1.0,
            policy_loss_scale: 1.0,
            value_shift: 0.0,
            advantage_std_scale: 1.0,
            tool_error_shift: 0.0,
            truncation_shift: 0.0,
            noise: NoiseScale::UNIT,
            corrupt: false,
            freeze: 0.0,
        }
    }
}

/// A full-run perturbation: one entry per step plus run-wide settings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Perturbation {
    pub steps: Vec<StepPerturbation>,
    /// Step whose values frozen steps are pulled toward.
    pub freeze_anchor: Option<usize>,
    /// Run-wide noise multipliers, applied on top of the per-step ones.
    pub global_noise: NoiseScale,
}

impl Perturbation {
    pub fn identity(steps: usize) -> Self {
        Perturbation {
            steps: vec![StepPerturbation::default(); steps],
            freeze_anchor: None,
            global_noise: NoiseScale::UNIT,
        }
    }

    fn at(&self, t: usize) -> StepPerturbation {
        self.steps.get(t).copied().unwrap_or_default()
    }
}

/// Standard-normal noise for each signal, one draw per step.
struct NoiseTape {
    reward: Vec<f64>,
    entropy: Vec<f64>,
    kl: Vec<f64>,
    length: Vec<f64>,
    ret: Vec<f64>,
    value: Vec<f64>,
    advantage_mean: Vec<f64>,
    advantage_std: Vec<f64>,
    policy_loss: Vec<f64>,
    tool_error: Vec<f64>,
    truncation: Vec<f64>,
    corruption: Vec<f64>,
}

impl NoiseTape {
    fn draw(seed: u64, n: usize) -> Self {
        let normals = |id| RngStream::new(seed, id).normals(n);
        NoiseTape {
            reward: normals(streams::REWARD),
            entropy: normals(streams::ENTROPY),
            kl: normals(streams::KL),
            length: normals(streams::LENGTH),
            ret: normals(streams::RETURN),
            value: normals(streams::VALUE),
            advantage_mean: normals(streams::ADVANTAGE_MEAN),
            advantage_std: normals(streams::ADVANTAGE_STD),
            policy_loss: normals(streams::POLICY_LOSS),
            tool_error: normals(streams::TOOL_ERROR),
            truncation: normals(streams::TRUNCATION),
            corruption: RngStream::new(seed, streams::CORRUPTION_VALUES).uniforms(3 * n),
        }
    }

    fn get(&self, signal: Signal, t: usize) -> f64 {
        let v = match signal {
            Signal::Reward => &self.reward,
            Signal::Kl => &self.kl,
            Signal::Entropy => &self.entropy,
            Signal::ResponseLength => &self.length,
            Signal::Return => &self.ret,
            Signal::Value => &self.value,
            Signal::AdvantageMean => &self.advantage_mean,
            Signal::AdvantageStd => &self.advantage_std,
            Signal::PolicyLoss => &self.policy_loss,
            Signal::ToolErrorRate => &self.tool_error,
            Signal::TruncationRate => &self.truncation,
            Signal::Step => return 0.0,
        };
        v[t]
    }
}

fn noise_sigma(config: &SimConfig, signal: Signal) -> f64 {
    match signal {
        Signal::Reward => config.reward_noise,
        Signal::Kl => config.kl_noise,
        Signal::Entropy => config.entropy_noise,
        Signal::ResponseLength => config.length_noise,
        Signal::Return => config.return_noise,
        Signal::Value => config.value_noise,
        Signal::AdvantageMean => config.advantage_noise,
        Signal::AdvantageStd => config.advantage_std_noise,
        Signal::PolicyLoss => config.loss_noise,
        Signal::ToolErrorRate | Signal::TruncationRate => config.rate_noise,
        Signal::Step => 0.0,
    }
}

/// Noise-free healthy reward at step `t`.
pub fn reward_law(config: &SimConfig, t: usize) -> f64 {
    config.reward_start
        + (config.reward_ceiling - config.reward_start)
            * (1.0 - (-(t as f64) / config.reward_timescale).exp())
}

/// Noise-free healthy entropy at step `t`.
pub fn entropy_law(config: &SimConfig, t: usize) -> f64 {
    config.entropy_floor
        + (config.entropy_start - config.entropy_floor)
            * (-(t as f64) / config.entropy_timescale).exp()
}

/// Noise-free healthy KL at step `t`.
pub fn kl_law(config: &SimConfig, t: usize) -> f64 {
    (config.kl_base + config.kl_drift * t as f64).max(0.0)
}

/// Noise-free healthy response length at step `t`.
pub fn length_law(config: &SimConfig, t: usize) -> f64 {
    config.length_target
        + (config.length_start - config.length_target)
            * (-(t as f64) / config.length_timescale).exp()
}

/// Noise-free healthy advantage std at step `t`.
pub fn advantage_std_law(config: &SimConfig, t: usize) -> f64 {
    (config.advantage_scale * (1.0 - t as f64 / config.advantage_decay_steps)).max(0.0)
}

/// Noise-free healthy policy loss at step `t`.
pub fn policy_loss_law(config: &SimConfig, t: usize) -> f64 {
    config.loss_start * config.loss_decay.powi(t as i32)
}

/// Generates `config.steps` records under a perturbation.
///
/// The identity perturbation yields the healthy run. `config` must already
/// be validated.
pub fn generate(
    config: &SimConfig,
    seed: u64,
    perturbation: &Perturbation,
) -> Vec<TrainStepRecord> {
    let n = config.steps;
    let tape = NoiseTape::draw(seed, n);
    let global = perturbation.global_noise;
    let noise = |signal: Signal, scale: &NoiseScale, t: usize| -> f64 {
        let mult = match signal {
            Signal::Reward => scale.reward,
            Signal::Kl => scale.kl,
            Signal::Entropy => scale.entropy,
            Signal::ResponseLength => scale.length,
            Signal::Return => scale.ret,
            Signal::Value => scale.value,
            Signal::AdvantageMean => scale.advantage_mean,
            Signal::AdvantageStd => scale.advantage_std,
            Signal::PolicyLoss => scale.policy_loss,
            Signal::ToolErrorRate => scale.tool_error,
            Signal::TruncationRate => scale.truncation,
            Signal::Step => 0.0,
        };
        noise_sigma(config, signal) * mult * tape.get(signal, t)
    };

    let healthy_reward: Vec<f64> = (0..n)
        .map(|t| reward_law(config, t) + noise(Signal::Reward, &global, t))
        .collect();

    let mut records: Vec<TrainStepRecord> = Vec::with_capacity(n);
    let mut returns: Vec<f64> = Vec::with_capacity(n);
    for t in 0..n {
        let p = perturbation.at(t);
        let scale = p.noise.combine(&global);

        let lagged = healthy_reward[t.saturating_sub(p.reward_lag)];
        let mut reward = lagged * p.reward_scale + p.reward_shift;

        let floor = config.entropy_floor * p.entropy_floor_scale;
        let timescale = config.entropy_timescale * p.entropy_timescale_scale;
        let entropy_base = floor + (config.entropy_start - floor) * (-(t as f64) / timescale).exp();
        let entropy =
            ((entropy_base + noise(Signal::Entropy, &scale, t)) * p.entropy_scale).max(0.0);

        let mut kl = ((config.kl_base + config.kl_drift * t as f64 + noise(Signal::Kl, &scale, t))
            * p.kl_scale)
            .max(0.0);

        let mut length = ((length_law(config, t) + noise(Signal::ResponseLength, &scale, t))
            * p.length_scale)
            .max(0.0);

        if p.corrupt {
            let u = &tape.corruption[3 * t..3 * t + 3];
            length = u[0] * 3.0 * config.length_target;
            reward = -1.0 + 3.0 * u[1];
            kl = u[2] * 10.0 * config.kl_base;
        }

        let policy_loss = (policy_loss_law(config, t) + noise(Signal::PolicyLoss, &scale, t))
            * p.policy_loss_scale;

        let return_source = if p.return_from_healthy_reward {
            healthy_reward[t]
        } else {
            reward
        };
        let ret = return_source + noise(Signal::Return, &scale, t);
        returns.push(ret);

        let value = returns[t.saturating_sub(config.value_lag)]
            + noise(Signal::Value, &scale, t)
            + p.value_shift;

        let advantage_mean = noise(Signal::AdvantageMean, &scale, t);
        let advantage_std = ((advantage_std_law(config, t)
            + noise(Signal::AdvantageStd, &scale, t))
            * p.advantage_std_scale)
            .max(0.0);

        let tool_error_rate =
            (config.tool_error_base + p.tool_error_shift + noise(Signal::ToolErrorRate, &scale, t))
                .clamp(0.0, 1.0);
        let truncation_rate = (config.truncation_base
            + p.truncation_shift
            + noise(Signal::TruncationRate, &scale, t))
        .clamp(0.0, 1.0);

        records.push(TrainStepRecord {
            step: t as u64,
            reward_mean: reward,
            kl_mean: kl,
            entropy_mean: entropy,
            return_mean: ret,
            value_mean: value,
            advantage_mean,
            advantage_std,
            response_length_mean: length,
            policy_loss,
            tool_error_rate,
            truncation_rate,
        });
    }

    if let Some(anchor_step) = perturbation.freeze_anchor.filter(|&a| a < n) {
        let anchor = records[anchor_step];
        for (t, rec) in records.iter_mut().enumerate() {
            let w = perturbation.at(t).freeze;
            if w <= 0.0 {
                continue;
            }
            for signal in Signal::ALL {
                if signal == Signal::PolicyLoss {
                    continue;
                }
                let frozen = anchor.get(signal) + 0.1 * noise(signal, &global, t);
                let slot = rec.get_mut(signal).expect("measured signal");
                *slot = (1.0 - w) * *slot + w * frozen;
            }
            rec.kl_mean = rec.kl_mean.max(0.0);
            rec.entropy_mean = rec.entropy_mean.max(0.0);
            rec.advantage_std = rec.advantage_std.max(0.0);
            rec.response_length_mean = rec.response_length_mean.max(0.0);
            rec.tool_error_rate = rec.tool_error_rate.clamp(0.0, 1.0);
            rec.truncation_rate = rec.truncation_rate.clamp(0.0, 1.0);
        }
    }

    records
}

/// Generates a healthy, NORMAL-labelled run.
pub fn simulate_healthy(config: &SimConfig, seed: u64) -> TrainingRun {
    let records = generate(config, seed, &Perturbation::identity(config.steps));
    TrainingRun::new(
        format!("healthy_{seed:016x}"),
        FaultLabel::NORMAL,
        None,
        seed,
        records,
        None,
    )
    .expect("generator emits valid records")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::healthy_defaults;
    use crate::stats;

    #[test]
    fn first_step_reward_near_start() {
        let cfg = healthy_defaults();
        let run = simulate_healthy(&cfg, 7);
        let r0 = run.steps()[0].reward_mean;
        assert!(
            (r0 - cfg.reward_start).abs() <= 3.0 * cfg.reward_noise,
            "{r0}"
        );
    }

    #[test]
    fn same_seed_same_run() {
        let cfg = healthy_defaults();
        assert_eq!(simulate_healthy(&cfg, 7), simulate_healthy(&cfg, 7));
        assert_ne!(
            simulate_healthy(&cfg, 7).steps(),
            simulate_healthy(&cfg, 8).steps()
        );
    }

    #[test]
    fn zero_noise_matches_closed_forms() {
        let cfg = healthy_defaults().noiseless();
        let run = simulate_healthy(&cfg, 99);
        for (t, rec) in run.steps().iter().enumerate() {
            assert_eq!(rec.reward_mean, reward_law(&cfg, t));
            assert_eq!(rec.entropy_mean, entropy_law(&cfg, t));
            assert_eq!(rec.kl_mean, kl_law(&cfg, t));
            assert_eq!(rec.response_length_mean, length_law(&cfg, t));
            assert_eq!(rec.return_mean, reward_law(&cfg, t));
            assert_eq!(
                rec.value_mean,
                reward_law(&cfg, t.saturating_sub(cfg.value_lag))
            );
            assert_eq!(rec.advantage_mean, 0.0);
            assert_eq!(rec.advantage_std, advantage_std_law(&cfg, t));
            assert_eq!(rec.policy_loss, policy_loss_law(&cfg, t));
            assert_eq!(rec.tool_error_rate, cfg.tool_error_base);
            assert_eq!(rec.truncation_rate, cfg.truncation_base);
        }
    }

    #[test]
    fn entropy_slope_negative_across_seeds() {
        let cfg = healthy_defaults();
        for seed in 0..100 {
            let run = simulate_healthy(&cfg, seed);
            let e: Vec<f64> = run.steps().iter().map(|r| r.entropy_mean).collect();
            assert!(stats::slope(&e) < 0.0, "seed {seed}");
        }
    }

    #[test]
    fn longer_run_extends_shorter_one() {
        let short = simulate_healthy(&SimConfig::with_steps(20), 5);
        let long = simulate_healthy(&SimConfig::with_steps(40), 5);
        assert_eq!(&long.steps()[..20], short.steps());
    }
}
