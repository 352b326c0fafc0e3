use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::Dataset;
use super::learner::{learn_tree, LearnedTree};
use crate::error::{Error, Result};

/// Splits `0..rows` into `folds` disjoint test folds: a seeded shuffle cut
/// into contiguous chunks whose sizes differ by at most one. Each fold is
/// returned in ascending row order. Every fold must leave at least two rows
/// for training and testing, so `rows ≥ 2·folds`.
pub fn fold_partition(rows: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidFolds(folds));
    }
    if rows < 2 * folds {
        return Err(Error::TooFewRows {
            folds,
            rows,
            needed: 2 * folds,
        });
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (rows / folds, rows % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        out.push(fold);
        start += len;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FoldResult {
    pub fold: usize,
    pub model: LearnedTree,
    pub test_rows: Vec<usize>,
    pub accuracy: f64,
}

/// Trains one tree per fold on the other folds and scores it on its own.
pub fn cross_validate(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<FoldResult>> {
    let partition = fold_partition(data.len(), folds, seed)?;
    partition
        .par_iter()
        .enumerate()
        .map(|(fold, test_rows)| {
            let mut in_test = vec![false; data.len()];
            for &r in test_rows {
                in_test[r] = true;
            }
            let train: Vec<usize> = (0..data.len()).filter(|&r| !in_test[r]).collect();
            let model = learn_tree(data, &train)?;
            let accuracy = model.accuracy(data, test_rows);
            Ok(FoldResult {
                fold,
                model,
                test_rows: test_rows.clone(),
                accuracy,
            })
        })
        .collect()
}
