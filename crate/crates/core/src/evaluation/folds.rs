use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::learners::Labels;

const QUANTILE_BINS: usize = 5;

/// Fold index for every sample. Each stratum is shuffled with `seed`, the
/// strata are laid end to end, and position `i` goes to fold `i mod k`, so
/// every stratum is spread over the folds as evenly as its size allows.
///
/// Every stratum index below `n_strata` must have at least `k` members.
pub fn stratified_kfold(strata: &[usize], n_strata: usize, k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::BadFoldCount(k));
    }
    if strata.len() < k {
        return Err(EvalError::TooFewSamples { n: strata.len(), k });
    }
    let mut members = vec![Vec::new(); n_strata.max(strata.iter().max().map_or(0, |m| m + 1))];
    for (i, &s) in strata.iter().enumerate() {
        members[s].push(i);
    }
    for (class, m) in members.iter().enumerate().take(n_strata) {
        if m.len() < k {
            return Err(EvalError::TooFewPerClass {
                class,
                count: m.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; strata.len()];
    let mut position = 0;
    for m in &mut members {
        m.shuffle(&mut rng);
        for &i in m.iter() {
            folds[i] = position % k;
            position += 1;
        }
    }
    Ok(folds)
}

/// Quintile bin of each value by rank (ties by index).
pub fn quantile_strata(y: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
    let mut bins = vec![0; y.len()];
    for (rank, &i) in order.iter().enumerate() {
        bins[i] = rank * QUANTILE_BINS / y.len();
    }
    bins
}

/// Stratified folds for either kind of label.
pub fn kfold_for(labels: &Labels, k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    match labels {
        Labels::Classes { y, n_classes } => stratified_kfold(y, *n_classes, k, seed),
        Labels::Values(v) => {
            if v.len() < k {
                return Err(EvalError::TooFewSamples { n: v.len(), k });
            }
            stratified_kfold(&quantile_strata(v), 0, k, seed)
        }
    }
}

/// Outer folds of one repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub repeat: usize,
    pub seed: u64,
    pub outer_k: usize,
    pub inner_k: usize,
    pub folds: Vec<usize>,
}

impl FoldPlan {
    pub fn new(labels: &Labels, repeat: usize, outer_k: usize, inner_k: usize, seed: u64) -> Result<Self, EvalError> {
        Ok(FoldPlan {
            repeat,
            seed,
            outer_k,
            inner_k,
            folds: kfold_for(labels, outer_k, seed)?,
        })
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }
}
