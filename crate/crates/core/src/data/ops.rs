//! Order, split, and corruption operations. All of them are pure: they
//! return new datasets or index sets and never mutate their input.

use super::{ClassId, Dataset};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// How labels get corrupted: `rate` of the instances (rounded half-up)
/// have their label redrawn. By default the replacement is drawn uniformly
/// from the *other* classes, so every corrupted label really changes;
/// with `allow_original` the draw is uniform over all classes and may
/// reproduce the original label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub rate: f64,
    pub seed: u64,
    pub allow_original: bool,
}

impl NoiseSpec {
    pub fn new(rate: f64, seed: u64) -> Self {
        NoiseSpec {
            rate,
            seed,
            allow_original: false,
        }
    }
}

/// Deterministic Fisher-Yates reordering of the instances.
pub fn shuffle(ds: &Dataset, seed: u64) -> Dataset {
    let mut order: Vec<usize> = (0..ds.len()).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    ds.subset(&order)
}

/// Stratified train/test split. Per class `c`, `round(fraction * |c|)`
/// instances go to train (half-up) and the rest to test, with the guard
/// that every non-empty class keeps at least one training instance.
/// Within each class the picks are randomized by `seed`; across classes
/// the returned datasets preserve the input's relative instance order.
pub fn stratified_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "train fraction must lie in (0,1), got {train_fraction}"
        )));
    }
    if ds.is_empty() {
        return Err(Error::Argument("cannot split an empty dataset".into()));
    }

    let mut rng = SplitMix64::new(seed);
    let mut to_train = vec![false; ds.len()];
    for mut group in ds.per_class_indices() {
        if group.is_empty() {
            continue;
        }
        let quota = ((train_fraction * group.len() as f64) + 0.5).floor() as usize;
        let quota = quota.clamp(1, group.len());
        rng.shuffle(&mut group);
        for &i in group.iter().take(quota) {
            to_train[i] = true;
        }
    }

    let train_idx: Vec<usize> = (0..ds.len()).filter(|&i| to_train[i]).collect();
    let test_idx: Vec<usize> = (0..ds.len()).filter(|&i| !to_train[i]).collect();
    Ok((ds.subset(&train_idx), ds.subset(&test_idx)))
}

/// Stratified fold assignment for cross-validation: returns, for each
/// fold, the instance indices it holds out. Per class the (seeded,
/// shuffled) members are dealt round-robin onto folds; the dealing
/// counter carries across classes so fold sizes stay within one of each
/// other overall, and `folds == len` degenerates to leave-one-out.
pub fn stratified_folds(ds: &Dataset, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Argument(format!("need at least 2 folds, got {folds}")));
    }
    if folds > ds.len() {
        return Err(Error::Argument(format!(
            "{folds} folds exceed the {} instances available",
            ds.len()
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut assignment = vec![Vec::new(); folds];
    let mut next = 0usize;
    for mut group in ds.per_class_indices() {
        rng.shuffle(&mut group);
        for &i in &group {
            assignment[next].push(i);
            next = (next + 1) % folds;
        }
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    Ok(assignment)
}

/// Corrupts labels per `spec` and returns the new dataset together with
/// the sorted indices whose label was redrawn. Exactly
/// `round(rate * len)` (half-up) distinct instances are selected.
pub fn inject_label_noise(ds: &Dataset, spec: &NoiseSpec) -> Result<(Dataset, Vec<usize>)> {
    if !(0.0..=1.0).contains(&spec.rate) || !spec.rate.is_finite() {
        return Err(Error::Argument(format!(
            "noise rate must lie in [0,1], got {}",
            spec.rate
        )));
    }
    let count = ((spec.rate * ds.len() as f64) + 0.5).floor() as usize;
    if count == 0 {
        return Ok((ds.clone(), Vec::new()));
    }
    if ds.n_classes() < 2 {
        return Err(Error::Argument(
            "label noise on a single-class dataset is meaningless".into(),
        ));
    }

    let mut rng = SplitMix64::new(spec.seed);
    let mut flipped = rng.sample_indices(ds.len(), count);
    flipped.sort_unstable();

    let k = ds.n_classes() as u64;
    let mut noisy = ds.clone();
    for &i in &flipped {
        let original = noisy.instances()[i].label;
        let new_label: ClassId = if spec.allow_original {
            rng.below(k) as usize
        } else {
            // Uniform over the other classes: draw from k-1 slots and skip
            // past the original.
            let draw = rng.below(k - 1) as usize;
            if draw >= original {
                draw + 1
            } else {
                draw
            }
        };
        noisy.set_label(i, new_label);
    }
    Ok((noisy, flipped))
}
