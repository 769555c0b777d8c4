//! Per-instance label correctness and what to do about it. The central
//! quantity is a correctness score: the fraction of a diverse learner
//! set whose out-of-fold prediction reproduces an instance's recorded
//! label. Low scores mark likely mislabels. The score drives a removal
//! filter and a training-weight mapping, and the same machinery hosts
//! the single-learner (biased) variants plus the classical baseline
//! filters used for comparison: repeated edited nearest neighbor, the
//! one-pass classification filter, the consensus/majority ensemble
//! filter, cross-validated committees, and iterative partitioning.
//!
//! Every filter honors a class-retention guard: a filter that would
//! empty a class keeps that class's strongest instance instead, since
//! downstream learners need at least one example of each class.

use crate::data::{ClassId, Dataset};
use crate::learners::{
    cross_val_scored, nearest_k, pick_argmax, weighted_priors, LearnerSpec, Preprocessor,
};
use crate::rng::derive_seed;
use crate::{Error, Result};
use rayon::prelude::*;

/// Fraction of an ensemble agreeing with each recorded label, aligned
/// to instance order. Kronecker-delta scores land exactly on the grid
/// {0, 1/size, ..., 1}; single-model scores occupy the whole interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectnessScores {
    pub scores: Vec<f64>,
    pub ensemble_size: usize,
}

impl CorrectnessScores {
    /// Columnar audit form: header, ensemble size, then one
    /// `index score` line per instance with round-trip floats.
    pub fn to_text(&self) -> String {
        let mut out = String::from("correctness-scores v1\n");
        out.push_str(&format!("ensemble-size: {}\n", self.ensemble_size));
        for (i, s) in self.scores.iter().enumerate() {
            out.push_str(&format!("{i} {s}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != "correctness-scores v1" {
            return Err(Error::Format(format!("unexpected header: {header:?}")));
        }
        let size_line = lines.next().unwrap_or("");
        let ensemble_size = size_line
            .strip_prefix("ensemble-size: ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad size line {size_line:?}")))?;
        let mut scores = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let idx: usize = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad score line {line:?}")))?;
            if idx != scores.len() {
                return Err(Error::Format(format!("out-of-order index {idx}")));
            }
            let score: f64 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad score line {line:?}")))?;
            scores.push(score);
        }
        Ok(CorrectnessScores {
            scores,
            ensemble_size,
        })
    }
}

/// Correctness under the Kronecker-delta rule: each learner in the set
/// casts one out-of-fold vote per instance, and the score is the agree
/// count divided by the set size. Learners run in parallel; each
/// learner's fold seed hangs off its token, so the scores do not depend
/// on set order or scheduling.
pub fn estimate_correctness(
    set: &[LearnerSpec],
    train: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<CorrectnessScores> {
    if set.is_empty() {
        return Err(Error::Argument("empty learner set".into()));
    }
    let labels = train.labels();
    let votes: Vec<Vec<ClassId>> = set
        .par_iter()
        .map(|spec| {
            let token = spec.to_string();
            let cv = cross_val_scored(spec, train, folds, derive_seed(seed, &[&token]))?;
            Ok(cv.predictions)
        })
        .collect::<Result<_>>()?;
    let scores = (0..train.len())
        .map(|i| {
            let agree = votes.iter().filter(|v| v[i] == labels[i]).count();
            agree as f64 / set.len() as f64
        })
        .collect();
    Ok(CorrectnessScores {
        scores,
        ensemble_size: set.len(),
    })
}

/// Out-of-fold confidence of one learner in each recorded label, using
/// the learner's own per-kind score (neighbor agreement, leaf purity,
/// normalized activations, and so on). `ensemble_size` is 1; the grid
/// property does not apply.
pub fn biased_scores(
    spec: &LearnerSpec,
    train: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<CorrectnessScores> {
    let cv = cross_val_scored(spec, train, folds, seed)?;
    Ok(CorrectnessScores {
        scores: cv.true_label_scores,
        ensemble_size: 1,
    })
}

/// Which instances a filter kept, both sides sorted ascending.
/// `threshold` records the deciding fraction: the configured cut for
/// score filters, the required wrong-judge fraction for the baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    pub threshold: f64,
}

impl FilterOutcome {
    fn from_flags(removed_flags: &[bool], threshold: f64) -> Self {
        let mut kept = Vec::new();
        let mut removed = Vec::new();
        for (i, &r) in removed_flags.iter().enumerate() {
            if r {
                removed.push(i);
            } else {
                kept.push(i);
            }
        }
        FilterOutcome {
            kept,
            removed,
            threshold,
        }
    }

    /// Columnar audit form: `index kept|removed` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::from("filter-outcome v1\n");
        out.push_str(&format!("threshold: {}\n", self.threshold));
        let n = self.kept.len() + self.removed.len();
        let mut removed_flag = vec![false; n];
        for &i in &self.removed {
            removed_flag[i] = true;
        }
        for (i, &r) in removed_flag.iter().enumerate() {
            out.push_str(&format!("{i} {}\n", if r { "removed" } else { "kept" }));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != "filter-outcome v1" {
            return Err(Error::Format(format!("unexpected header: {header:?}")));
        }
        let thr_line = lines.next().unwrap_or("");
        let threshold: f64 = thr_line
            .strip_prefix("threshold: ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad threshold line {thr_line:?}")))?;
        let mut kept = Vec::new();
        let mut removed = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let idx: usize = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad outcome line {line:?}")))?;
            match parts.next() {
                Some("kept") => kept.push(idx),
                Some("removed") => removed.push(idx),
                _ => return Err(Error::Format(format!("bad outcome line {line:?}"))),
            }
        }
        Ok(FilterOutcome {
            kept,
            removed,
            threshold,
        })
    }
}

/// Whether a misclassification fraction exactly at the threshold is
/// enough to remove. With an odd judge count exact ties cannot occur;
/// with an even count [`ThresholdRule::AtLeast`] removes at the tie,
/// which is the default reading of "misclassified by half".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdRule {
    #[default]
    AtLeast,
    Strict,
}

/// Restores, for every class a filter emptied, that class's best
/// surviving candidate: highest score, ties to the lowest index.
fn class_guard(labels: &[ClassId], n_classes: usize, scores: &[f64], removed: &mut [bool]) {
    for class in 0..n_classes {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() || members.iter().any(|&i| !removed[i]) {
            continue;
        }
        let mut best = members[0];
        for &i in &members[1..] {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        removed[best] = false;
    }
}

/// Score-threshold filter: drop instance i when the disagreeing
/// fraction (1 - score_i) reaches the threshold.
pub fn l_filter(
    train: &Dataset,
    s: &CorrectnessScores,
    threshold: f64,
) -> Result<FilterOutcome> {
    l_filter_with(train, s, threshold, ThresholdRule::AtLeast)
}

pub fn l_filter_with(
    train: &Dataset,
    s: &CorrectnessScores,
    threshold: f64,
    rule: ThresholdRule,
) -> Result<FilterOutcome> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Argument(format!("threshold {threshold} outside (0,1]")));
    }
    if s.scores.len() != train.len() {
        return Err(Error::Argument(format!(
            "{} scores for {} instances",
            s.scores.len(),
            train.len()
        )));
    }
    let mut removed: Vec<bool> = s
        .scores
        .iter()
        .map(|&score| match rule {
            ThresholdRule::AtLeast => (1.0 - score) >= threshold,
            ThresholdRule::Strict => (1.0 - score) > threshold,
        })
        .collect();
    class_guard(&train.labels(), train.n_classes(), &s.scores, &mut removed);
    Ok(FilterOutcome::from_flags(&removed, threshold))
}

/// Training weights equal to the scores, except exact zeros are floored
/// at half a single vote, 1/(2·size), so no instance silently drops out
/// of weight-respecting learners.
pub fn l_weights(s: &CorrectnessScores) -> Vec<f64> {
    let floor = 1.0 / (2.0 * s.ensemble_size as f64);
    s.scores
        .iter()
        .map(|&v| if v == 0.0 { floor } else { v })
        .collect()
}

/// Weights from single-model confidence scores. The committee floor of
/// half a vote would be absurd at ensemble size one, so zeros get a
/// value small enough to be negligible while keeping every learner's
/// weight handling well-defined.
pub fn biased_weights(s: &CorrectnessScores) -> Vec<f64> {
    const FLOOR: f64 = 1e-6;
    s.scores
        .iter()
        .map(|&v| if v > 0.0 { v } else { FLOOR })
        .collect()
}

/// Repeated edited nearest neighbor: every pass removes, simultaneously,
/// all instances whose k nearest surviving neighbors outvote their
/// label; passes repeat until one removes nothing. Too-small datasets
/// (fewer than k+1 survivors) stop with a warning.
pub fn renn_filter(train: &Dataset, k: usize) -> Result<FilterOutcome> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let prep = Preprocessor::fit(train);
    let rows = prep.resolve_all(train);
    let labels = train.labels();
    let n = train.len();
    let priors = {
        let w = vec![1.0; n];
        weighted_priors(&labels, &w, train.n_classes())
    };

    let mut removed = vec![false; n];
    loop {
        let survivors: Vec<usize> = (0..n).filter(|&i| !removed[i]).collect();
        if survivors.len() < k + 1 {
            log::warn!(
                "nearest-neighbor editing needs {} instances, have {}; stopping",
                k + 1,
                survivors.len()
            );
            break;
        }
        let mut pass_removed = Vec::new();
        for &i in &survivors {
            let mut dists: Vec<(f64, usize)> = survivors
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (prep.heom(&rows[i], &rows[j]), j))
                .collect();
            let mut votes = vec![0.0; train.n_classes()];
            for &(_, j) in nearest_k(&mut dists, k) {
                votes[labels[j]] += 1.0;
            }
            if pick_argmax(&votes, &priors) != labels[i] {
                pass_removed.push(i);
            }
        }
        if pass_removed.is_empty() {
            break;
        }
        for i in pass_removed {
            removed[i] = true;
        }
    }

    scoreless_guard(&labels, train.n_classes(), &mut removed);
    Ok(FilterOutcome::from_flags(&removed, 1.0))
}

/// Guard for filters with no score to rank by: the lowest-index removed
/// instance of an emptied class is restored.
fn scoreless_guard(labels: &[ClassId], n_classes: usize, removed: &mut [bool]) {
    let uniform = vec![0.0; labels.len()];
    class_guard(labels, n_classes, &uniform, removed);
}

/// One-pass removal of out-of-fold misclassified instances under a
/// single judge learner.
pub fn classification_filter(
    train: &Dataset,
    spec: &LearnerSpec,
    folds: usize,
    seed: u64,
) -> Result<FilterOutcome> {
    let cv = cross_val_scored(spec, train, folds, seed)?;
    let labels = train.labels();
    let mut removed: Vec<bool> = cv
        .predictions
        .iter()
        .zip(&labels)
        .map(|(p, t)| p != t)
        .collect();
    scoreless_guard(&labels, train.n_classes(), &mut removed);
    Ok(FilterOutcome::from_flags(&removed, 1.0))
}

/// Default judge for [`classification_filter`].
pub fn default_classification_judge() -> LearnerSpec {
    LearnerSpec::knn(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Remove only when every judge misclassifies.
    Consensus,
    /// Remove when more than half of the judges misclassify.
    Majority,
}

/// The classical committee of judges, each cross-validated on the full
/// training set; removal by consensus or majority of misclassifications.
pub fn ensemble_filter(
    train: &Dataset,
    trio: &[LearnerSpec],
    mode: FilterMode,
    folds: usize,
    seed: u64,
) -> Result<FilterOutcome> {
    if trio.len() < 2 {
        return Err(Error::Argument(format!(
            "committee filter needs at least 2 learners, got {}",
            trio.len()
        )));
    }
    let labels = train.labels();
    let verdicts: Vec<Vec<ClassId>> = trio
        .par_iter()
        .map(|spec| {
            let token = spec.to_string();
            let cv = cross_val_scored(spec, train, folds, derive_seed(seed, &[&token]))?;
            Ok(cv.predictions)
        })
        .collect::<Result<_>>()?;
    let mut removed: Vec<bool> = (0..train.len())
        .map(|i| {
            let wrong = verdicts.iter().filter(|v| v[i] != labels[i]).count();
            match mode {
                FilterMode::Consensus => wrong == trio.len(),
                FilterMode::Majority => 2 * wrong > trio.len(),
            }
        })
        .collect();
    scoreless_guard(&labels, train.n_classes(), &mut removed);
    let threshold = match mode {
        FilterMode::Consensus => 1.0,
        FilterMode::Majority => 0.5,
    };
    Ok(FilterOutcome::from_flags(&removed, threshold))
}

/// The classical committee membership: a tree, a single nearest
/// neighbor, and naive Bayes.
pub fn default_trio() -> Vec<LearnerSpec> {
    vec![
        LearnerSpec::decision_tree(),
        LearnerSpec::knn(1),
        LearnerSpec::NaiveBayes,
    ]
}

/// Cross-validated committees: n models, each trained with one subset
/// held out, all predicting the full set; removal requires every model
/// to misclassify.
pub fn cvc_filter(
    train: &Dataset,
    partitions: usize,
    spec: &LearnerSpec,
    seed: u64,
) -> Result<FilterOutcome> {
    if partitions < 2 {
        return Err(Error::Argument(format!(
            "need at least 2 partitions, got {partitions}"
        )));
    }
    let subsets = crate::data::stratified_folds(train, partitions, derive_seed(seed, &["parts"]))?;
    let labels = train.labels();
    let mut wrong = vec![0usize; train.len()];
    for (p, held_out) in subsets.iter().enumerate() {
        let mut hold = vec![false; train.len()];
        for &i in held_out {
            hold[i] = true;
        }
        let rest: Vec<usize> = (0..train.len()).filter(|&i| !hold[i]).collect();
        let sub = train.subset(&rest);
        let model = crate::learners::train(
            spec,
            &sub,
            None,
            derive_seed(seed, &["model", &p.to_string()]),
        )
        .map_err(|e| e.in_cell(&spec.to_string(), train.name()))?;
        for (i, inst) in train.instances().iter().enumerate() {
            if model.predict(inst)? != labels[i] {
                wrong[i] += 1;
            }
        }
    }
    let mut removed: Vec<bool> = wrong.iter().map(|&w| w == partitions).collect();
    scoreless_guard(&labels, train.n_classes(), &mut removed);
    Ok(FilterOutcome::from_flags(&removed, 1.0))
}

/// Iterative partitioning: each round splits the survivors into n
/// subsets, trains one tree per subset, and removes instances every
/// tree misclassifies; rounds repeat until a round removes fewer than
/// 1% of the ORIGINAL training size.
pub fn iterative_partitioning_filter(
    train: &Dataset,
    partitions: usize,
    seed: u64,
) -> Result<FilterOutcome> {
    if partitions < 2 {
        return Err(Error::Argument(format!(
            "need at least 2 partitions, got {partitions}"
        )));
    }
    let spec = LearnerSpec::decision_tree();
    let labels = train.labels();
    let stop_below = 0.01 * train.len() as f64;
    let mut removed = vec![false; train.len()];

    for round in 0.. {
        let survivors: Vec<usize> = (0..train.len()).filter(|&i| !removed[i]).collect();
        if survivors.len() < partitions {
            log::warn!(
                "partitioning needs {} instances, have {}; stopping",
                partitions,
                survivors.len()
            );
            break;
        }
        let current = train.subset(&survivors);
        let round_tag = round.to_string();
        let subsets = crate::data::stratified_folds(
            &current,
            partitions,
            derive_seed(seed, &["round", &round_tag]),
        )?;
        let mut wrong = vec![0usize; survivors.len()];
        for (p, members) in subsets.iter().enumerate() {
            let part = current.subset(members);
            let model = crate::learners::train(
                &spec,
                &part,
                None,
                derive_seed(seed, &["round", &round_tag, "model", &p.to_string()]),
            )
            .map_err(|e| e.in_cell(&spec.to_string(), train.name()))?;
            for (local, inst) in current.instances().iter().enumerate() {
                if model.predict(inst)? != inst.label {
                    wrong[local] += 1;
                }
            }
        }
        let this_round: Vec<usize> = survivors
            .iter()
            .enumerate()
            .filter(|&(local, _)| wrong[local] == partitions)
            .map(|(_, &orig)| orig)
            .collect();
        for &i in &this_round {
            removed[i] = true;
        }
        if (this_round.len() as f64) < stop_below {
            break;
        }
    }

    scoreless_guard(&labels, train.n_classes(), &mut removed);
    Ok(FilterOutcome::from_flags(&removed, 1.0))
}
