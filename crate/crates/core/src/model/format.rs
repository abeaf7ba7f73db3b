//! Line-oriented run files: one JSON header object, then one JSON object per
//! step record.

use serde::{Deserialize, Serialize};

use super::{
    DifficultyRegime, FaultFamily, FaultLabel, FaultType, InjectionSchedule, RunError,
    TrainStepRecord, TrainingRun,
};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    run_id: String,
    label_family: String,
    label_type: String,
    regime: Option<DifficultyRegime>,
    seed: u64,
    schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    injection: Option<InjectionSchedule>,
}

/// Renders a run in the line-oriented file format.
///
/// Output is deterministic and every float uses the shortest representation
/// that parses back to the same bits.
pub fn serialize_run(run: &TrainingRun) -> Vec<u8> {
    let header = Header {
        run_id: run.run_id().to_string(),
        label_family: run.label().family().id().to_string(),
        label_type: run.label().fault_type().id().to_string(),
        regime: run.regime(),
        seed: run.seed(),
        schema_version: SCHEMA_VERSION.to_string(),
        injection: run.injection().cloned(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for rec in run.steps() {
        serde_json::to_writer(&mut out, rec).expect("record serializes");
        out.push(b'\n');
    }
    out
}

/// Parses a run file, reporting the first offending line on failure.
pub fn parse_run(bytes: &[u8]) -> Result<TrainingRun, RunError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| RunError::MalformedHeader(format!("not UTF-8: {e}")))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header_line) = lines
        .next()
        .ok_or_else(|| RunError::MalformedHeader("empty input".into()))?;
    let header: Header =
        serde_json::from_str(header_line).map_err(|e| RunError::MalformedHeader(e.to_string()))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(RunError::MalformedHeader(format!(
            "unsupported schema_version {:?}",
            header.schema_version
        )));
    }
    let family: FaultFamily = header.label_family.parse().map_err(|_| {
        RunError::MalformedHeader(format!("unknown family {}", header.label_family))
    })?;
    let fault_type: FaultType = header
        .label_type
        .parse()
        .map_err(|_| RunError::MalformedHeader(format!("unknown type {}", header.label_type)))?;
    let label = FaultLabel::new(family, fault_type)?;

    let mut steps = Vec::new();
    for (line, content) in lines {
        if content.trim().is_empty() {
            continue;
        }
        let rec: TrainStepRecord =
            serde_json::from_str(content).map_err(|e| RunError::MalformedRecord {
                line,
                reason: e.to_string(),
            })?;
        if let Err(field) = rec.check_domains() {
            return Err(RunError::MalformedRecord {
                line,
                reason: format!("{field} out of domain"),
            });
        }
        let expected = steps.len() as u64;
        if rec.step != expected {
            return Err(RunError::NonContiguousSteps {
                line,
                expected,
                found: rec.step,
            });
        }
        steps.push(rec);
    }

    TrainingRun::new(
        header.run_id,
        label,
        header.regime,
        header.seed,
        steps,
        header.injection,
    )
    .map_err(|e| match e {
        RunError::Invalid(msg) => RunError::MalformedHeader(msg),
        other => other,
    })
}
