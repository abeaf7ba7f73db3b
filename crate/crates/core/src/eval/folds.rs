use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::model::TrainingRun;
use crate::sim::RngStream;

use super::EvalError;

const FOLD_STREAM: u64 = 50;

/// Run id to fold index in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub folds: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, run_id: &str) -> Option<usize> {
        self.folds.get(run_id).copied()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.folds.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

fn stratum(run: &TrainingRun) -> (String, String) {
    let regime = run.regime().map_or("normal", |r| r.id());
    (
        run.label().fault_type().id().to_string(),
        regime.to_string(),
    )
}

/// Stratified assignment by `(fault_type, regime)`.
///
/// Each stratum is shuffled with `seed` and dealt round-robin, so fold sizes
/// within a stratum differ by at most one. The dealing offset carries over
/// from one stratum to the next to keep overall fold sizes even.
pub fn kfold_split(runs: &[TrainingRun], k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    kfold_split_refs(&runs.iter().collect::<Vec<_>>(), k, seed)
}

pub fn kfold_split_refs(
    runs: &[&TrainingRun],
    k: usize,
    seed: u64,
) -> Result<FoldAssignment, EvalError> {
    if k < 2 {
        return Err(EvalError::KTooLarge(k));
    }
    let mut strata: BTreeMap<(String, String), Vec<&str>> = BTreeMap::new();
    for run in runs {
        strata.entry(stratum(run)).or_default().push(run.run_id());
    }
    let mut rng = RngStream::new(seed, FOLD_STREAM).rng();
    let mut folds = BTreeMap::new();
    let mut offset = 0;
    for ((fault, regime), mut ids) in strata {
        if ids.len() < k {
            log::warn!(
                "stratum {fault}/{regime} has {} runs for {k} folds",
                ids.len()
            );
        }
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        for (i, id) in ids.iter().enumerate() {
            folds.insert(id.to_string(), (offset + i) % k);
        }
        offset = (offset + ids.len()) % k;
    }
    Ok(FoldAssignment { k, folds })
}
