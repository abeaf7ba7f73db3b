use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{DifficultyRegime, FaultType, InjectionSchedule, ScheduleMode};
use crate::sim::rng::{streams, RngStream};

use super::InjectError;

/// Timing and magnitude parameters of a fault, before expansion to steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub mode: ScheduleMode,
    pub base_strength: f64,
    pub onset_step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duty_cycle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_steps: Option<usize>,
}

impl ScheduleParams {
    pub fn always_on(base_strength: f64) -> Self {
        ScheduleParams {
            mode: ScheduleMode::AlwaysOn,
            base_strength,
            onset_step: 0,
            duty_cycle: None,
            ramp_steps: None,
        }
    }

    pub fn delayed(base_strength: f64, onset_step: usize) -> Self {
        ScheduleParams {
            mode: ScheduleMode::Delayed,
            onset_step,
            ..Self::always_on(base_strength)
        }
    }

    pub fn ramp(base_strength: f64, onset_step: usize, ramp_steps: usize) -> Self {
        ScheduleParams {
            mode: ScheduleMode::Ramp,
            onset_step,
            ramp_steps: Some(ramp_steps),
            ..Self::always_on(base_strength)
        }
    }

    pub fn intermittent(base_strength: f64, onset_step: usize, duty_cycle: f64) -> Self {
        ScheduleParams {
            mode: ScheduleMode::Intermittent,
            onset_step,
            duty_cycle: Some(duty_cycle),
            ..Self::always_on(base_strength)
        }
    }
}

/// One fault to inject: what, how salient, and when.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub fault_type: FaultType,
    pub regime: DifficultyRegime,
    pub params: ScheduleParams,
}

impl FaultSpec {
    /// Validates the regime's strength band: easy faults run at full
    /// strength, hard faults at 0.25 to 0.5.
    pub fn new(
        fault_type: FaultType,
        regime: DifficultyRegime,
        params: ScheduleParams,
    ) -> Result<Self, InjectError> {
        if fault_type == FaultType::Normal {
            return Err(InjectError::InvalidSpec("cannot inject NORMAL".into()));
        }
        let ok = match regime {
            DifficultyRegime::Easy => params.base_strength == 1.0,
            DifficultyRegime::Hard => (0.25..=0.5).contains(&params.base_strength),
        };
        if !ok {
            return Err(InjectError::InvalidSpec(format!(
                "base_strength {} outside the {regime} band",
                params.base_strength
            )));
        }
        Ok(FaultSpec {
            fault_type,
            regime,
            params,
        })
    }

    /// Like [`FaultSpec::new`] but without the regime strength band; used
    /// for strength sweeps.
    pub fn unchecked(
        fault_type: FaultType,
        regime: DifficultyRegime,
        params: ScheduleParams,
    ) -> Self {
        FaultSpec {
            fault_type,
            regime,
            params,
        }
    }

    /// Draws a spec for the regime from `seed`.
    ///
    /// Easy: always-on or a short ramp from step 0, strength 1.0.
    /// Hard: intermittent, ramp or delayed; strength uniform in [0.25, 0.5];
    /// onset uniform in [5, 20].
    pub fn realize(fault_type: FaultType, regime: DifficultyRegime, seed: u64) -> Self {
        let mut rng = RngStream::new(seed, streams::REGIME).rng();
        let params = match regime {
            DifficultyRegime::Easy => {
                if rng.random_bool(0.5) {
                    ScheduleParams::always_on(1.0)
                } else {
                    ScheduleParams::ramp(1.0, 0, rng.random_range(3..=8))
                }
            }
            DifficultyRegime::Hard => {
                let strength = rng.random_range(0.25..=0.5);
                let onset = rng.random_range(5..=20);
                match rng.random_range(0..3) {
                    0 => ScheduleParams::intermittent(strength, onset, rng.random_range(0.4..=0.8)),
                    1 => ScheduleParams::ramp(strength, onset, rng.random_range(5..=15)),
                    _ => ScheduleParams::delayed(strength, onset),
                }
            }
        };
        FaultSpec {
            fault_type,
            regime,
            params,
        }
    }
}

/// Expands a spec into per-step strengths.
///
/// Intermittent activation is drawn from `seed`; the onset step itself is
/// always active so an intermittent fault never vanishes entirely.
pub fn build_schedule(
    spec: &FaultSpec,
    steps: usize,
    seed: u64,
) -> Result<InjectionSchedule, InjectError> {
    let p = spec.params;
    if steps == 0 {
        return Err(InjectError::InvalidSpec("steps must be positive".into()));
    }
    if p.onset_step >= steps {
        return Err(InjectError::InvalidSpec(format!(
            "onset {} not before run end {steps}",
            p.onset_step
        )));
    }
    if !(p.base_strength > 0.0 && p.base_strength <= 1.0) {
        return Err(InjectError::InvalidSpec(
            "base_strength must lie in (0, 1]".into(),
        ));
    }
    let mut strength = vec![0.0; steps];
    match p.mode {
        ScheduleMode::AlwaysOn | ScheduleMode::Delayed => {
            strength[p.onset_step..].fill(p.base_strength);
        }
        ScheduleMode::Ramp => {
            let ramp = p
                .ramp_steps
                .filter(|&r| r > 0)
                .ok_or_else(|| InjectError::InvalidSpec("ramp needs ramp_steps >= 1".into()))?;
            for (t, s) in strength.iter_mut().enumerate().skip(p.onset_step) {
                let frac = ((t - p.onset_step) as f64 / ramp as f64).min(1.0);
                *s = p.base_strength * frac;
            }
        }
        ScheduleMode::Intermittent => {
            let duty = p
                .duty_cycle
                .filter(|d| *d > 0.0 && *d <= 1.0)
                .ok_or_else(|| {
                    InjectError::InvalidSpec("intermittent needs duty_cycle in (0, 1]".into())
                })?;
            let draws = RngStream::new(seed, streams::SCHEDULE).uniforms(steps);
            for t in p.onset_step..steps {
                if t == p.onset_step || draws[t] < duty {
                    strength[t] = p.base_strength;
                }
            }
        }
    }
    Ok(InjectionSchedule {
        mode: p.mode,
        base_strength: p.base_strength,
        onset_step: p.onset_step,
        duty_cycle: p.duty_cycle,
        ramp_steps: p.ramp_steps,
        per_step_strength: strength,
    })
}
