//! Fault taxonomy: five families, sixteen fault types, plus the healthy label.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunError;

/// Coarse fault family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultFamily {
    #[serde(rename = "RF")]
    Reward,
    #[serde(rename = "PG")]
    PolicyGeneration,
    #[serde(rename = "OD")]
    OptimizationDynamics,
    #[serde(rename = "CA")]
    CreditAssignment,
    #[serde(rename = "TE")]
    ToolEnvironment,
    #[serde(rename = "NORMAL")]
    Normal,
}

impl FaultFamily {
    /// The five fault families in taxonomy order (excludes `Normal`).
    pub const FAULTY: [FaultFamily; 5] = [
        FaultFamily::Reward,
        FaultFamily::PolicyGeneration,
        FaultFamily::OptimizationDynamics,
        FaultFamily::CreditAssignment,
        FaultFamily::ToolEnvironment,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FaultFamily::Reward => "RF",
            FaultFamily::PolicyGeneration => "PG",
            FaultFamily::OptimizationDynamics => "OD",
            FaultFamily::CreditAssignment => "CA",
            FaultFamily::ToolEnvironment => "TE",
            FaultFamily::Normal => "NORMAL",
        }
    }

    /// Fault types belonging to this family, in taxonomy order.
    pub fn types(self) -> impl Iterator<Item = FaultType> {
        FaultType::ALL
            .into_iter()
            .filter(move |t| t.family() == self)
    }
}

impl Ord for FaultFamily {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id().cmp(other.id())
    }
}

impl PartialOrd for FaultFamily {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FaultFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FaultFamily {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FaultFamily::FAULTY
            .into_iter()
            .chain([FaultFamily::Normal])
            .find(|f| f.id() == s)
            .ok_or_else(|| RunError::UnknownLabel(s.to_string()))
    }
}

/// Fine-grained fault type. `Normal` marks a healthy run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultType {
    #[serde(rename = "RF-1")]
    RewardSpike,
    #[serde(rename = "RF-2")]
    RewardCollapse,
    #[serde(rename = "RF-3")]
    RewardHacking,
    #[serde(rename = "PG-1")]
    EmptyResponse,
    #[serde(rename = "PG-2")]
    RepetitionCollapse,
    #[serde(rename = "PG-3S")]
    LengthShort,
    #[serde(rename = "PG-3L")]
    LengthLong,
    #[serde(rename = "OD-1")]
    KlExplosion,
    #[serde(rename = "OD-2")]
    UpdateFreeze,
    #[serde(rename = "OD-3")]
    EntropyCollapse,
    #[serde(rename = "CA-1")]
    ValueMismatch,
    #[serde(rename = "CA-2")]
    AdvantageInstability,
    #[serde(rename = "CA-3")]
    DelayedCredit,
    #[serde(rename = "TE-1")]
    ToolCallError,
    #[serde(rename = "TE-2")]
    ObservationCorruption,
    #[serde(rename = "TE-3")]
    TerminationError,
    #[serde(rename = "NORMAL")]
    Normal,
}

impl FaultType {
    /// All sixteen fault types in taxonomy order (excludes `Normal`).
    pub const ALL: [FaultType; 16] = [
        FaultType::RewardSpike,
        FaultType::RewardCollapse,
        FaultType::RewardHacking,
        FaultType::EmptyResponse,
        FaultType::RepetitionCollapse,
        FaultType::LengthShort,
        FaultType::LengthLong,
        FaultType::KlExplosion,
        FaultType::UpdateFreeze,
        FaultType::EntropyCollapse,
        FaultType::ValueMismatch,
        FaultType::AdvantageInstability,
        FaultType::DelayedCredit,
        FaultType::ToolCallError,
        FaultType::ObservationCorruption,
        FaultType::TerminationError,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FaultType::RewardSpike => "RF-1",
            FaultType::RewardCollapse => "RF-2",
            FaultType::RewardHacking => "RF-3",
            FaultType::EmptyResponse => "PG-1",
            FaultType::RepetitionCollapse => "PG-2",
            FaultType::LengthShort => "PG-3S",
            FaultType::LengthLong => "PG-3L",
            FaultType::KlExplosion => "OD-1",
            FaultType::UpdateFreeze => "OD-2",
            FaultType::EntropyCollapse => "OD-3",
            FaultType::ValueMismatch => "CA-1",
            FaultType::AdvantageInstability => "CA-2",
            FaultType::DelayedCredit => "CA-3",
            FaultType::ToolCallError => "TE-1",
            FaultType::ObservationCorruption => "TE-2",
            FaultType::TerminationError => "TE-3",
            FaultType::Normal => "NORMAL",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FaultType::RewardSpike => "Reward Spike",
            FaultType::RewardCollapse => "Reward Collapse",
            FaultType::RewardHacking => "Reward Hacking",
            FaultType::EmptyResponse => "Empty Response",
            FaultType::RepetitionCollapse => "Repetition Collapse",
            FaultType::LengthShort => "Length Short",
            FaultType::LengthLong => "Length Long",
            FaultType::KlExplosion => "KL Explosion",
            FaultType::UpdateFreeze => "Update Freeze",
            FaultType::EntropyCollapse => "Entropy Collapse",
            FaultType::ValueMismatch => "Value Mismatch",
            FaultType::AdvantageInstability => "Advantage Instability",
            FaultType::DelayedCredit => "Delayed Credit",
            FaultType::ToolCallError => "Tool Call Error",
            FaultType::ObservationCorruption => "Observation Corruption",
            FaultType::TerminationError => "Termination Error",
            FaultType::Normal => "Normal",
        }
    }

    pub fn family(self) -> FaultFamily {
        use FaultType::*;
        match self {
            RewardSpike | RewardCollapse | RewardHacking => FaultFamily::Reward,
            EmptyResponse | RepetitionCollapse | LengthShort | LengthLong => {
                FaultFamily::PolicyGeneration
            }
            KlExplosion | UpdateFreeze | EntropyCollapse => FaultFamily::OptimizationDynamics,
            ValueMismatch | AdvantageInstability | DelayedCredit => FaultFamily::CreditAssignment,
            ToolCallError | ObservationCorruption | TerminationError => {
                FaultFamily::ToolEnvironment
            }
            Normal => FaultFamily::Normal,
        }
    }

    /// Position in [`FaultType::ALL`]; `None` for `Normal`.
    pub fn index(self) -> Option<usize> {
        FaultType::ALL.iter().position(|t| *t == self)
    }
}

impl Ord for FaultType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id().cmp(other.id())
    }
}

impl PartialOrd for FaultType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FaultType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FaultType {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FaultType::ALL
            .into_iter()
            .chain([FaultType::Normal])
            .find(|t| t.id() == s)
            .ok_or_else(|| RunError::UnknownLabel(s.to_string()))
    }
}

/// Ground-truth label of a run: a family together with one of its types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FaultLabel {
    family: FaultFamily,
    fault_type: FaultType,
}

impl FaultLabel {
    pub const NORMAL: FaultLabel = FaultLabel {
        family: FaultFamily::Normal,
        fault_type: FaultType::Normal,
    };

    /// Pairs a family with a type, rejecting combinations outside the taxonomy.
    pub fn new(family: FaultFamily, fault_type: FaultType) -> Result<Self, RunError> {
        if fault_type.family() != family {
            return Err(RunError::LabelFamilyMismatch {
                line: 1,
                family: family.id().to_string(),
                fault_type: fault_type.id().to_string(),
            });
        }
        Ok(FaultLabel { family, fault_type })
    }

    pub fn of(fault_type: FaultType) -> Self {
        FaultLabel {
            family: fault_type.family(),
            fault_type,
        }
    }

    pub fn family(&self) -> FaultFamily {
        self.family
    }

    pub fn fault_type(&self) -> FaultType {
        self.fault_type
    }

    pub fn is_normal(&self) -> bool {
        self.fault_type == FaultType::Normal
    }
}

impl fmt::Display for FaultLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.fault_type.id())
    }
}

/// Salience regime of an injected fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DifficultyRegime {
    Easy,
    Hard,
}

impl DifficultyRegime {
    pub const ALL: [DifficultyRegime; 2] = [DifficultyRegime::Easy, DifficultyRegime::Hard];

    /// Run length used for this regime.
    pub fn steps(self) -> usize {
        match self {
            DifficultyRegime::Easy => 20,
            DifficultyRegime::Hard => 40,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            DifficultyRegime::Easy => "easy",
            DifficultyRegime::Hard => "hard",
        }
    }
}

impl fmt::Display for DifficultyRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DifficultyRegime {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(DifficultyRegime::Easy),
            "hard" => Ok(DifficultyRegime::Hard),
            other => Err(RunError::UnknownLabel(other.to_string())),
        }
    }
}
