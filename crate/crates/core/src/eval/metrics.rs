use serde::{Deserialize, Serialize};

/// Precision, recall and F1 as fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// F1 is zero when both precision and recall are.
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Metrics from a confusion count. An empty denominator gives zero.
pub fn prf(tp: usize, fp: usize, fn_: usize) -> Prf {
    Prf::new(ratio(tp, tp + fp), ratio(tp, tp + fn_))
}

/// Unweighted mean of each metric. Macro-F1 is the mean of the per-class
/// F1 values, not the harmonic mean of macro precision and recall.
pub fn macro_prf(per_class: &[Prf]) -> Prf {
    if per_class.is_empty() {
        return Prf::default();
    }
    let n = per_class.len() as f64;
    Prf {
        precision: per_class.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: per_class.iter().map(|m| m.recall).sum::<f64>() / n,
        f1: per_class.iter().map(|m| m.f1).sum::<f64>() / n,
    }
}

/// One-vs-rest metrics for each of `classes` from `(truth, prediction)`
/// pairs. A missing prediction counts against recall only.
pub fn per_class_prf<C: PartialEq + Copy>(
    pairs: &[(C, Option<C>)],
    classes: &[C],
) -> Vec<(C, Prf)> {
    classes
        .iter()
        .map(|&c| {
            let tp = pairs
                .iter()
                .filter(|(t, p)| *t == c && *p == Some(c))
                .count();
            let fp = pairs
                .iter()
                .filter(|(t, p)| *t != c && *p == Some(c))
                .count();
            let fn_ = pairs
                .iter()
                .filter(|(t, p)| *t == c && *p != Some(c))
                .count();
            (c, prf(tp, fp, fn_))
        })
        .collect()
}
