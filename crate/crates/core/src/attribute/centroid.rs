use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{FaultFamily, FaultLabel, FaultType};
use crate::stats;

use super::fingerprint::FaultFingerprint;
use super::AttributeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Family,
    Type,
}

impl std::str::FromStr for Granularity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "family" => Ok(Granularity::Family),
            "type" => Ok(Granularity::Type),
            other => Err(format!("unknown granularity {other:?}")),
        }
    }
}

/// A predicted class at either granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Attribution {
    Family(FaultFamily),
    Type(FaultType),
}

impl Attribution {
    pub fn of(label: FaultLabel, granularity: Granularity) -> Self {
        match granularity {
            Granularity::Family => Attribution::Family(label.family()),
            Granularity::Type => Attribution::Type(label.fault_type()),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Attribution::Family(f) => f.id(),
            Attribution::Type(t) => t.id(),
        }
    }

    pub fn family(&self) -> FaultFamily {
        match self {
            Attribution::Family(f) => *f,
            Attribution::Type(t) => t.family(),
        }
    }
}

impl fmt::Display for Attribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCentroid {
    pub class: Attribution,
    pub centroid: Vec<f64>,
}

/// Nearest-centroid classifier over standardized fingerprints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionModel {
    pub granularity: Granularity,
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
    /// One centroid per fault type, sorted by id so the first minimum wins
    /// ties. At family granularity the answer is the nearest type's family.
    pub classes: Vec<ClassCentroid>,
}

impl AttributionModel {
    pub fn dim(&self) -> usize {
        self.location.len()
    }

    /// Maps a fingerprint into the space the centroids live in.
    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.location.iter().zip(&self.scale))
            .map(|(v, (l, s))| (v - l) / s)
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), AttributeError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| AttributeError::Format(e.to_string()))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| AttributeError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, AttributeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AttributeError::Io(format!("{}: {e}", path.display())))?;
        let m: AttributionModel =
            serde_json::from_str(&text).map_err(|e| AttributeError::Format(e.to_string()))?;
        let d = m.dim();
        if m.scale.len() != d
            || m.classes.iter().any(|c| c.centroid.len() != d)
            || m.classes.is_empty()
        {
            return Err(AttributeError::Format(
                "inconsistent model dimensions".into(),
            ));
        }
        Ok(m)
    }
}

/// Coordinate scale: scaled MAD, falling back to the standard deviation and
/// then to one when the training set has no spread on that coordinate.
fn coordinate_scale(xs: &[f64]) -> f64 {
    let (_, mad) = stats::robust_location_scale(xs);
    if mad > stats::SCALE_FLOOR {
        return mad;
    }
    let sd = stats::std_dev(xs);
    if sd > stats::SCALE_FLOOR {
        sd
    } else {
        1.0
    }
}

pub fn fit_attributor(
    labeled: &[(FaultFingerprint, FaultLabel)],
    granularity: Granularity,
) -> Result<AttributionModel, AttributeError> {
    let Some((first, _)) = labeled.first() else {
        return Err(AttributeError::EmptyTrainingSet);
    };
    let d = first.dim();
    for (fp, label) in labeled {
        if fp.dim() != d {
            return Err(AttributeError::DimensionMismatch {
                expected: d,
                found: fp.dim(),
            });
        }
        if label.is_normal() {
            return Err(AttributeError::EmptyClass(
                "NORMAL is not an attributable class".into(),
            ));
        }
    }
    let mut location = Vec::with_capacity(d);
    let mut scale = Vec::with_capacity(d);
    for k in 0..d {
        let col: Vec<f64> = labeled.iter().map(|(fp, _)| fp.values[k]).collect();
        location.push(stats::median(&col));
        scale.push(coordinate_scale(&col));
    }
    let mut model = AttributionModel {
        granularity,
        location,
        scale,
        classes: Vec::new(),
    };
    // centroids are kept per type at either granularity; a family answer is
    // the family of the nearest type
    let mut classes: Vec<Attribution> = labeled
        .iter()
        .map(|(_, l)| Attribution::of(*l, Granularity::Type))
        .collect();
    classes.sort_by(|a, b| a.id().cmp(b.id()));
    classes.dedup();
    for class in classes {
        let members: Vec<Vec<f64>> = labeled
            .iter()
            .filter(|(_, l)| Attribution::of(*l, Granularity::Type) == class)
            .map(|(fp, _)| model.standardize(&fp.values))
            .collect();
        let centroid = (0..d)
            .map(|k| members.iter().map(|m| m[k]).sum::<f64>() / members.len() as f64)
            .collect();
        model.classes.push(ClassCentroid { class, centroid });
    }
    Ok(model)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The class whose centroid is nearest to `fp`; ties go to the smallest id.
pub fn attribute(
    model: &AttributionModel,
    fp: &FaultFingerprint,
) -> Result<Attribution, AttributeError> {
    if fp.dim() != model.dim() {
        return Err(AttributeError::DimensionMismatch {
            expected: model.dim(),
            found: fp.dim(),
        });
    }
    let z = model.standardize(&fp.values);
    attribute_standardized(model, &z)
}

/// Like [`attribute`], for a point already in the model's standardized space.
pub fn attribute_standardized(
    model: &AttributionModel,
    z: &[f64],
) -> Result<Attribution, AttributeError> {
    let mut best: Option<(f64, Attribution)> = None;
    for c in &model.classes {
        let d = squared_distance(z, &c.centroid);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, c.class));
        }
    }
    let class = best
        .map(|(_, c)| c)
        .ok_or(AttributeError::EmptyTrainingSet)?;
    Ok(match model.granularity {
        Granularity::Type => class,
        Granularity::Family => Attribution::Family(class.family()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(v: &[f64]) -> FaultFingerprint {
        FaultFingerprint { values: v.to_vec() }
    }

    #[test]
    fn singleton_classes_keep_their_example() {
        let data = vec![
            (fp(&[0.0, 1.0]), FaultLabel::of(FaultType::RewardSpike)),
            (fp(&[2.0, 5.0]), FaultLabel::of(FaultType::RewardCollapse)),
        ];
        let m = fit_attributor(&data, Granularity::Type).unwrap();
        for (x, l) in &data {
            assert_eq!(
                m.classes
                    .iter()
                    .find(|c| c.class == Attribution::Type(l.fault_type()))
                    .unwrap()
                    .centroid,
                m.standardize(&x.values)
            );
            assert_eq!(attribute(&m, x).unwrap(), Attribution::Type(l.fault_type()));
        }
    }

    #[test]
    fn equidistant_goes_to_smallest_id() {
        let data = vec![
            (fp(&[-1.0]), FaultLabel::of(FaultType::RewardCollapse)),
            (fp(&[1.0]), FaultLabel::of(FaultType::RewardSpike)),
        ];
        let m = fit_attributor(&data, Granularity::Type).unwrap();
        assert_eq!(
            attribute(&m, &fp(&[0.0])).unwrap(),
            Attribution::Type(FaultType::RewardSpike)
        );
    }

    #[test]
    fn family_answer_is_family_of_nearest_type() {
        let data = vec![
            (fp(&[0.0]), FaultLabel::of(FaultType::RewardSpike)),
            (fp(&[1.0]), FaultLabel::of(FaultType::RewardCollapse)),
            (fp(&[9.0]), FaultLabel::of(FaultType::KlExplosion)),
        ];
        let m = fit_attributor(&data, Granularity::Family).unwrap();
        assert_eq!(m.classes.len(), 3);
        assert_eq!(
            attribute(&m, &fp(&[0.4])).unwrap(),
            Attribution::Family(FaultFamily::Reward)
        );
        assert_eq!(
            attribute(&m, &fp(&[6.0])).unwrap(),
            Attribution::Family(FaultFamily::OptimizationDynamics)
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = fit_attributor(
            &[(fp(&[0.0, 1.0]), FaultLabel::of(FaultType::RewardSpike))],
            Granularity::Type,
        )
        .unwrap();
        assert!(matches!(
            attribute(&m, &fp(&[0.0])),
            Err(AttributeError::DimensionMismatch { .. })
        ));
    }
}
