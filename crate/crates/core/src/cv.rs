//! Stratified k-fold splitting and the accuracy metric.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Test-index sets of each fold; each fold trains on the complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub folds: Vec<Vec<usize>>,
    pub n_samples: usize,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut held = alloc::vec![false; self.n_samples];
        self.folds[fold].iter().for_each(|&i| held[i] = true);
        (0..self.n_samples).filter(|&i| !held[i]).collect()
    }
}

/// Shuffles each class with `seed`, then deals members round-robin into `k`
/// folds. The dealing cursor carries over between classes so fold sizes
/// differ by at most one.
pub fn stratified_kfold<L: Ord + Copy>(labels: &[L], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::InvalidParameter(alloc::format!("k must be at least 2, got {k}")));
    }
    let mut by_class: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(*l).or_default().push(i);
    }
    // Below two members some training split would lack the class entirely.
    if let Some(small) = by_class.values().find(|m| m.len() < 2) {
        return Err(Error::ClassTooSmall { count: small.len(), folds: k });
    }
    if let Some(small) = by_class.values().find(|m| m.len() < k) {
        log::warn!("a class has {} members for {k} folds; some test folds will lack it", small.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = (0..k).map(|_| Vec::new()).collect();
    let mut cursor = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[cursor].push(i);
            cursor = (cursor + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldSplit { folds, n_samples: labels.len() })
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy<L: PartialEq>(predicted: &[L], truth: &[L]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: predicted.len() });
    }
    if truth.is_empty() {
        return Err(Error::Empty);
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}
