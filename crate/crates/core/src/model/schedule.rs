use serde::{Deserialize, Serialize};

/// How fault activation evolves over a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    AlwaysOn,
    Intermittent,
    Ramp,
    Delayed,
}

impl ScheduleMode {
    pub const ALL: [ScheduleMode; 4] = [
        ScheduleMode::AlwaysOn,
        ScheduleMode::Intermittent,
        ScheduleMode::Ramp,
        ScheduleMode::Delayed,
    ];
}

/// Per-step activation strength of an injected fault.
///
/// Stored alongside every injected run so the run can be regenerated
/// (for example, after a remediation changes the effective strength).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionSchedule {
    pub mode: ScheduleMode,
    pub base_strength: f64,
    pub onset_step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duty_cycle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_steps: Option<usize>,
    pub per_step_strength: Vec<f64>,
}

impl InjectionSchedule {
    /// A schedule that never activates.
    pub fn inactive(steps: usize) -> Self {
        InjectionSchedule {
            mode: ScheduleMode::AlwaysOn,
            base_strength: 0.0,
            onset_step: 0,
            duty_cycle: None,
            ramp_steps: None,
            per_step_strength: vec![0.0; steps],
        }
    }

    pub fn len(&self) -> usize {
        self.per_step_strength.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_step_strength.is_empty()
    }

    pub fn strength(&self, step: usize) -> f64 {
        self.per_step_strength.get(step).copied().unwrap_or(0.0)
    }

    pub fn is_active(&self, step: usize) -> bool {
        self.strength(step) > 0.0
    }

    /// Indices of steps with non-zero strength.
    pub fn active_steps(&self) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.is_active(t)).collect()
    }

    pub fn first_active(&self) -> Option<usize> {
        (0..self.len()).find(|&t| self.is_active(t))
    }

    /// Same timing, every strength multiplied by `factor` (floored at zero).
    pub fn scaled(&self, factor: f64) -> Self {
        let factor = factor.max(0.0);
        InjectionSchedule {
            per_step_strength: self.per_step_strength.iter().map(|u| u * factor).collect(),
            ..self.clone()
        }
    }
}
