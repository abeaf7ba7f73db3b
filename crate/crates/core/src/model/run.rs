use super::{DifficultyRegime, FaultLabel, InjectionSchedule, RunError, TrainStepRecord};

/// An ordered sequence of step records with its ground-truth label.
///
/// Construction validates every invariant, so a `TrainingRun` in hand is
/// always well-formed: non-empty, steps contiguous from zero, every field in
/// domain, and injection metadata present exactly when the label is faulty.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    run_id: String,
    label: FaultLabel,
    regime: Option<DifficultyRegime>,
    seed: u64,
    steps: Vec<TrainStepRecord>,
    injection: Option<InjectionSchedule>,
}

impl TrainingRun {
    pub fn new(
        run_id: impl Into<String>,
        label: FaultLabel,
        regime: Option<DifficultyRegime>,
        seed: u64,
        steps: Vec<TrainStepRecord>,
        injection: Option<InjectionSchedule>,
    ) -> Result<Self, RunError> {
        let run_id = run_id.into();
        if run_id.is_empty() {
            return Err(RunError::Invalid("run_id must be non-empty".into()));
        }
        if steps.is_empty() {
            return Err(RunError::EmptyRun);
        }
        for (idx, rec) in steps.iter().enumerate() {
            // header occupies line 1
            let line = idx + 2;
            if rec.step != idx as u64 {
                return Err(RunError::NonContiguousSteps {
                    line,
                    expected: idx as u64,
                    found: rec.step,
                });
            }
            if let Err(field) = rec.check_domains() {
                return Err(RunError::MalformedRecord {
                    line,
                    reason: format!("{field} out of domain"),
                });
            }
        }
        match (label.is_normal(), &injection) {
            (true, Some(_)) => {
                return Err(RunError::Invalid(
                    "normal run must not carry injection metadata".into(),
                ))
            }
            (false, None) => {
                return Err(RunError::Invalid(
                    "faulty run requires injection metadata".into(),
                ))
            }
            _ => {}
        }
        if label.is_normal() != regime.is_none() {
            return Err(RunError::Invalid(
                "regime must be set exactly for faulty runs".into(),
            ));
        }
        if let Some(schedule) = &injection {
            if schedule.len() != steps.len() {
                return Err(RunError::Invalid(format!(
                    "schedule covers {} steps but run has {}",
                    schedule.len(),
                    steps.len()
                )));
            }
            if schedule
                .per_step_strength
                .iter()
                .any(|u| !u.is_finite() || !(0.0..=1.0).contains(u))
            {
                return Err(RunError::Invalid("strength outside [0, 1]".into()));
            }
        }
        Ok(TrainingRun {
            run_id,
            label,
            regime,
            seed,
            steps,
            injection,
        })
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    pub fn label(&self) -> FaultLabel {
        self.label
    }

    pub fn regime(&self) -> Option<DifficultyRegime> {
        self.regime
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn steps(&self) -> &[TrainStepRecord] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Always false; runs are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn injection(&self) -> Option<&InjectionSchedule> {
        self.injection.as_ref()
    }

    /// The same run under a different identifier.
    pub fn with_id(mut self, run_id: impl Into<String>) -> Self {
        let id = run_id.into();
        if !id.is_empty() {
            self.run_id = id;
        }
        self
    }
}
