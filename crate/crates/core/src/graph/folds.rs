use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ConfigError, Dataset};

/// One rotation of nested cross-validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified nested k-fold partition.
///
/// Graphs of each class are shuffled, then the class blocks are laid end to
/// end and dealt round-robin into `folds` buckets, so every bucket receives
/// `⌊n_c/folds⌋` or `⌈n_c/folds⌉` graphs of class `c`. Split `i` tests on
/// bucket `i`, validates on bucket `(i + 1) % folds` and trains on the rest.
/// With two folds the non-test bucket is halved into training and validation.
pub fn stratified_folds(
    dataset: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<Vec<Split>, ConfigError> {
    stratified_folds_from_targets(&dataset.targets(), dataset.num_classes, folds, seed)
}

pub(crate) fn stratified_folds_from_targets(
    targets: &[usize],
    num_classes: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<Split>, ConfigError> {
    if folds < 2 {
        return Err(ConfigError::TooFewFolds(folds));
    }
    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &t) in targets.iter().enumerate() {
        by_class[t].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < folds {
            return Err(ConfigError::SmallClass {
                class,
                count: members.len(),
                folds,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buckets = vec![Vec::new(); folds];
    let mut pos = 0usize;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            buckets[pos % folds].push(i);
            pos += 1;
        }
    }

    let sorted = |mut v: Vec<usize>| {
        v.sort_unstable();
        v
    };
    Ok((0..folds)
        .map(|i| {
            let val = (i + 1) % folds;
            let (train, validation) = if folds == 2 {
                // No third bucket to train on: halve the other bucket, which
                // is still in class-block order, alternating members.
                let (t, v): (Vec<_>, Vec<_>) = buckets[val]
                    .iter()
                    .enumerate()
                    .partition(|(p, _)| p % 2 == 0);
                (
                    t.into_iter().map(|(_, &x)| x).collect(),
                    v.into_iter().map(|(_, &x)| x).collect(),
                )
            } else {
                let train = (0..folds)
                    .filter(|&f| f != i && f != val)
                    .flat_map(|f| buckets[f].iter().copied())
                    .collect();
                (train, buckets[val].clone())
            };
            Split {
                train: sorted(train),
                validation: sorted(validation),
                test: sorted(buckets[i].clone()),
            }
        })
        .collect())
}
