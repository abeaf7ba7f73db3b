use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::attribute::Granularity;
use crate::model::DifficultyRegime;

use super::metrics::Prf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalTask {
    Detection,
    Diagnosis,
    Remediation,
}

impl EvalTask {
    pub fn name(self) -> &'static str {
        match self {
            EvalTask::Detection => "detection",
            EvalTask::Diagnosis => "diagnosis",
            EvalTask::Remediation => "remediation",
        }
    }
}

/// What a row aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Family,
    Type,
    /// Unweighted mean over the regime's classes.
    Macro,
}

/// One report line. Classification rows fill precision, recall and F1;
/// remediation rows fill mitigation rate and median severity change. All
/// figures are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub regime: DifficultyRegime,
    pub kind: RowKind,
    pub group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mitigation_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_severity_change: Option<f64>,
    pub cases: usize,
}

impl ReportRow {
    pub fn classification(
        regime: DifficultyRegime,
        kind: RowKind,
        group: &str,
        m: Prf,
        cases: usize,
    ) -> Self {
        ReportRow {
            regime,
            kind,
            group: group.to_string(),
            precision: Some(100.0 * m.precision),
            recall: Some(100.0 * m.recall),
            f1: Some(100.0 * m.f1),
            mitigation_rate: None,
            median_severity_change: None,
            cases,
        }
    }
}

/// Settings the report was produced with.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalConfig {
    pub horizon: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_coef: Option<f64>,
    #[serde(default)]
    pub no_calibration: bool,
    #[serde(default)]
    pub no_invariants: bool,
    #[serde(default)]
    pub no_temporal: bool,
    #[serde(default)]
    pub no_fingerprint: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub granularity: Option<Granularity>,
    #[serde(default)]
    pub pipeline: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_family: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: EvalTask,
    pub config: EvalConfig,
    pub folds: usize,
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn row(&self, regime: DifficultyRegime, group: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.regime == regime && r.group == group)
    }

    pub fn macro_row(&self, regime: DifficultyRegime) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.regime == regime && r.kind == RowKind::Macro)
    }

    /// Macro F1 of the regime in percent.
    pub fn macro_f1(&self, regime: DifficultyRegime) -> Option<f64> {
        self.macro_row(regime).and_then(|r| r.f1)
    }

    pub fn family_rows(&self, regime: DifficultyRegime) -> impl Iterator<Item = &ReportRow> {
        self.rows
            .iter()
            .filter(move |r| r.regime == regime && r.kind == RowKind::Family)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned text table.
    pub fn to_table(&self) -> String {
        let c = &self.config;
        let mut out = format!("{} horizon={} seed={}", self.task.name(), c.horizon, c.seed);
        if let Some(k) = c.k_coef {
            let _ = write!(out, " k={k}");
        }
        if let Some(g) = c.granularity {
            let _ = write!(
                out,
                " granularity={}",
                if g == Granularity::Type {
                    "type"
                } else {
                    "family"
                }
            );
        }
        if let Some(p) = &c.planner {
            let _ = write!(out, " planner={p}");
        }
        for (on, flag) in [
            (c.no_calibration, "no-calibration"),
            (c.no_invariants, "no-invariants"),
            (c.no_temporal, "no-temporal"),
            (c.no_fingerprint, "no-fingerprint"),
            (c.pipeline, "pipeline"),
        ] {
            if on {
                let _ = write!(out, " {flag}");
            }
        }
        if self.folds > 0 {
            let _ = write!(out, " folds={}", self.folds);
        }
        out.push('\n');
        let remediation = self.task == EvalTask::Remediation;
        let head = if remediation {
            ["regime", "group", "MR", "MSC", "", "cases"]
        } else {
            ["regime", "group", "P", "R", "F1", "cases"]
        };
        let _ = writeln!(
            out,
            "{:<7}{:<8}{:>8}{:>8}{:>8}{:>7}",
            head[0], head[1], head[2], head[3], head[4], head[5]
        );
        let cell = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.2}"));
        for r in &self.rows {
            let group = if r.kind == RowKind::Macro {
                "avg"
            } else {
                r.group.as_str()
            };
            let (a, b, f) = if remediation {
                (
                    cell(r.mitigation_rate),
                    cell(r.median_severity_change),
                    String::new(),
                )
            } else {
                (cell(r.precision), cell(r.recall), cell(r.f1))
            };
            let _ = writeln!(
                out,
                "{:<7}{:<8}{a:>8}{b:>8}{f:>8}{:>7}",
                r.regime.id(),
                group,
                r.cases
            );
        }
        out
    }
}
