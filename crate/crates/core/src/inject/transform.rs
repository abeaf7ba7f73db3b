use crate::model::{FaultType, InjectionSchedule};
use crate::sim::rng::{streams, RngStream};
use crate::sim::{Perturbation, StepPerturbation};

/// How fault `fault` at strength `u` perturbs step `t`.
///
/// `onset` is the schedule's onset step and `steps` the run length; both
/// only matter for faults that grow over time. Strength zero always yields
/// the identity.
pub fn step_perturbation(
    fault: FaultType,
    u: f64,
    t: usize,
    onset: usize,
    steps: usize,
) -> StepPerturbation {
    let mut p = StepPerturbation::default();
    if u <= 0.0 {
        return p;
    }
    match fault {
        FaultType::RewardSpike => p.reward_scale = 1.0 + 3.0 * u,
        FaultType::RewardCollapse => p.reward_scale = 1.0 - u,
        FaultType::RewardHacking => {
            p.reward_shift = 0.5 * u;
            p.entropy_scale = 1.0 - 0.6 * u;
        }
        FaultType::EmptyResponse => {
            p.length_scale = 1.0 - 0.95 * u;
            p.reward_scale = 1.0 - 0.9 * u;
            p.policy_loss_scale = 1.0 - 0.8 * u;
            p.kl_scale = 1.0 - 0.8 * u;
        }
        FaultType::RepetitionCollapse => {
            p.entropy_scale = 1.0 - 0.7 * u;
            p.length_scale = 1.0 + 0.5 * u;
            p.reward_scale = 1.0 - 0.6 * u;
        }
        FaultType::LengthShort => p.length_scale = 1.0 - 0.7 * u,
        FaultType::LengthLong => p.length_scale = 1.0 + 1.5 * u,
        FaultType::KlExplosion => {
            let elapsed = t.saturating_sub(onset) as f64 / steps.max(1) as f64;
            p.kl_scale = 1.0 + 20.0 * u * elapsed;
            p.noise.length = 1.0 + 2.0 * u;
        }
        FaultType::UpdateFreeze => {
            p.freeze = u;
            p.policy_loss_scale = 1.0 - u;
        }
        FaultType::EntropyCollapse => {
            p.entropy_timescale_scale = 1.0 - 0.8 * u;
            p.entropy_floor_scale = 1.0 - 0.5 * u;
        }
        FaultType::ValueMismatch => p.value_shift = 1.5 * u,
        FaultType::AdvantageInstability => {
            p.advantage_std_scale = 1.0 + 8.0 * u;
            p.noise.advantage_mean = 1.0 + 4.0 * u;
        }
        FaultType::DelayedCredit => {
            p.reward_lag = (5.0 * u).ceil() as usize;
            p.return_from_healthy_reward = true;
        }
        FaultType::ToolCallError => {
            p.tool_error_shift = 0.9 * u;
            p.noise.kl = 1.0 + 3.0 * u;
            p.noise.entropy = 1.0 + 3.0 * u;
        }
        // Corruption is triggered per step by `perturbation`.
        FaultType::ObservationCorruption => {}
        FaultType::TerminationError => {
            p.truncation_shift = 0.8 * u;
            p.length_scale = 1.0 - 0.5 * u;
            p.noise.ret = 1.0 + 3.0 * u;
        }
        FaultType::Normal => {}
    }
    p
}

/// The full-run perturbation for `fault` under `schedule`.
///
/// `seed` is the run seed; observation corruption draws its per-step
/// triggers from it (a step is corrupted with probability equal to its
/// strength).
pub fn perturbation(fault: FaultType, schedule: &InjectionSchedule, seed: u64) -> Perturbation {
    let n = schedule.len();
    let onset = schedule.onset_step;
    let mut steps: Vec<StepPerturbation> = (0..n)
        .map(|t| step_perturbation(fault, schedule.strength(t), t, onset, n))
        .collect();
    let mut freeze_anchor = None;
    match fault {
        FaultType::ObservationCorruption => {
            let triggers = RngStream::new(seed, streams::CORRUPTION_TRIGGER).uniforms(n);
            for (t, p) in steps.iter_mut().enumerate() {
                let u = schedule.strength(t);
                p.corrupt = u > 0.0 && triggers[t] < u;
            }
        }
        FaultType::UpdateFreeze => freeze_anchor = schedule.first_active(),
        _ => {}
    }
    Perturbation {
        steps,
        freeze_anchor,
        ..Perturbation::identity(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_strength_is_identity_for_every_fault() {
        for fault in FaultType::ALL {
            for t in 0..40 {
                assert_eq!(
                    step_perturbation(fault, 0.0, t, 0, 40),
                    StepPerturbation::default()
                );
            }
        }
    }

    #[test]
    fn nonzero_strength_changes_every_fault() {
        for fault in FaultType::ALL {
            if fault == FaultType::ObservationCorruption {
                continue;
            }
            // KL explosion grows from zero at onset, so look one step later.
            assert_ne!(
                step_perturbation(fault, 0.5, 5, 0, 20),
                StepPerturbation::default(),
                "{fault}"
            );
        }
    }

    #[test]
    fn corruption_follows_strength() {
        let sched = InjectionSchedule {
            per_step_strength: vec![1.0; 20],
            ..InjectionSchedule::inactive(20)
        };
        let p = perturbation(FaultType::ObservationCorruption, &sched, 3);
        assert!(p.steps.iter().all(|s| s.corrupt));
        let p = perturbation(
            FaultType::ObservationCorruption,
            &InjectionSchedule::inactive(20),
            3,
        );
        assert!(p.steps.iter().all(|s| !s.corrupt));
    }
}
