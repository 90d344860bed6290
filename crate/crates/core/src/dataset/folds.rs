use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::rng::Lcg;

/// Number of cross-validation folds used throughout.
pub const NUM_FOLDS: usize = 10;

/// Fold index per example, keyed by source recording.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    folds: usize,
    assignments: Vec<usize>,
    by_source: BTreeMap<String, usize>,
}

impl FoldSplit {
    pub fn num_folds(&self) -> usize {
        self.folds
    }

    /// Fold of every input id, in input order.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn fold_of_source(&self, source_id: &str) -> Option<usize> {
        self.by_source.get(source_id).copied()
    }

    /// Distinct sources per fold.
    pub fn sources_per_fold(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.folds];
        for &f in self.by_source.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Ten-fold split of the given per-example source ids.
pub fn make_folds(source_ids: &[impl AsRef<str>], seed: u64) -> Result<FoldSplit> {
    make_k_folds(source_ids, NUM_FOLDS, seed)
}

/// Shuffle the distinct sources (taken in sorted order) with a seeded
/// generator and deal them round-robin into `k` folds. Every example inherits
/// the fold of its source, so augmented variants never straddle folds.
pub fn make_k_folds(source_ids: &[impl AsRef<str>], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let distinct: BTreeSet<&str> = source_ids.iter().map(|s| s.as_ref()).collect();
    if distinct.len() < k {
        return Err(Error::Config(format!(
            "{k}-fold split needs at least {k} distinct sources, found {}",
            distinct.len()
        )));
    }
    let mut order: Vec<&str> = distinct.into_iter().collect();
    Lcg::new(seed).shuffle(&mut order);
    let by_source: BTreeMap<String, usize> = order
        .iter()
        .enumerate()
        .map(|(i, s)| (s.to_string(), i % k))
        .collect();
    let assignments = source_ids.iter().map(|s| by_source[s.as_ref()]).collect();
    Ok(FoldSplit {
        folds: k,
        assignments,
        by_source,
    })
}
