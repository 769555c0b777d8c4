//! Plurality-vote ensembles over arbitrary base learner sets. Three
//! member regimes exist: plain members train on the data as given;
//! weighted members train with their own out-of-fold label confidence
//! as instance weights; filtered members train on the subset that
//! survives their own out-of-fold misclassification filter. Votes are
//! unweighted label votes either way, with ties broken by the higher
//! training prior and then the lower class index.

use crate::data::{ClassId, Dataset, Instance};
use crate::learners::{pick_argmax, train, uniform_weights, LearnerSpec, Model};
use crate::noiseid::{biased_scores, biased_weights, classification_filter};
use crate::rng::derive_seed;
use crate::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleMode {
    Plain,
    /// Members weight instances by their own biased scores.
    Weighted { folds: usize },
    /// Members drop instances their own judge misclassifies.
    Filtered { folds: usize },
}

pub struct VotingEnsemble {
    members: Vec<Model>,
    priors: Vec<f64>,
}

impl VotingEnsemble {
    /// Assembles an ensemble from already-trained members. The priors
    /// drive tie-breaking and normally come from the shared training
    /// set. Members must agree on schema width and class count.
    pub fn from_members(members: Vec<Model>, priors: Vec<f64>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Argument("ensemble needs at least one member".into()))?;
        let (nf, nc) = (first.n_features(), first.n_classes());
        if priors.len() != nc {
            return Err(Error::Argument(format!(
                "{} priors for {} classes",
                priors.len(),
                nc
            )));
        }
        for m in &members {
            if m.n_features() != nf || m.n_classes() != nc {
                return Err(Error::Argument(
                    "ensemble members disagree on schema".into(),
                ));
            }
        }
        Ok(VotingEnsemble { members, priors })
    }

    pub fn members(&self) -> &[Model] {
        &self.members
    }

    /// Plurality label over member predictions.
    pub fn vote(&self, x: &Instance) -> Result<ClassId> {
        let mut counts = vec![0.0; self.priors.len()];
        for m in &self.members {
            counts[m.predict(x)?] += 1.0;
        }
        Ok(pick_argmax(&counts, &self.priors))
    }
}

/// Trains one member per spec on the given data under the chosen
/// regime. Member seeds hang off the learner token, so duplicate specs
/// train identically (an intentional double vote) and member order
/// never matters.
pub fn build_ensemble(
    specs: &[LearnerSpec],
    train_ds: &Dataset,
    mode: EnsembleMode,
    seed: u64,
) -> Result<VotingEnsemble> {
    if specs.is_empty() {
        return Err(Error::Argument("ensemble needs at least one member".into()));
    }
    let members: Vec<Model> = specs
        .par_iter()
        .map(|spec| {
            let token = spec.to_string();
            let fit_seed = derive_seed(seed, &[&token]);
            let model = match mode {
                EnsembleMode::Plain => train(spec, train_ds, None, fit_seed)?,
                EnsembleMode::Weighted { folds } => {
                    let scores =
                        biased_scores(spec, train_ds, folds, derive_seed(seed, &[&token, "bias"]))?;
                    let weights = biased_weights(&scores);
                    train(spec, train_ds, Some(&weights), fit_seed)?
                }
                EnsembleMode::Filtered { folds } => {
                    let outcome = classification_filter(
                        train_ds,
                        spec,
                        folds,
                        derive_seed(seed, &[&token, "bias"]),
                    )?;
                    train(spec, &train_ds.subset(&outcome.kept), None, fit_seed)?
                }
            };
            Ok(model)
        })
        .collect::<Result<_>>()?;

    let labels = train_ds.labels();
    let weights = uniform_weights(train_ds.len());
    let priors = crate::learners::weighted_priors(&labels, &weights, train_ds.n_classes());
    VotingEnsemble::from_members(members, priors)
}

/// The fixed small committee used as a reference point: five nearest
/// neighbors, the perceptron, and the forest.
pub fn three_ensemble_specs() -> Vec<LearnerSpec> {
    vec![
        LearnerSpec::knn(5),
        LearnerSpec::mlp(),
        LearnerSpec::random_forest(50),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth, FeatureDescriptor, Value};

    fn constant_member(ds: &Dataset, class: usize, seed: u64) -> Model {
        // A 1-NN trained only on instances of one class can answer
        // nothing else.
        let idx: Vec<usize> = ds
            .instances()
            .iter()
            .enumerate()
            .filter(|(_, inst)| inst.label == class)
            .map(|(i, _)| i)
            .collect();
        train(&LearnerSpec::knn(1), &ds.subset(&idx), None, seed).unwrap()
    }

    #[test]
    fn single_member_matches_the_model() {
        let ds = synth::two_blobs(60, 1);
        let spec = [LearnerSpec::knn(5)];
        let ens = build_ensemble(&spec, &ds, EnsembleMode::Plain, 3).unwrap();
        let solo = train(&spec[0], &ds, None, derive_seed(3, &[&spec[0].to_string()])).unwrap();
        for inst in ds.instances() {
            assert_eq!(ens.vote(inst).unwrap(), solo.predict(inst).unwrap());
        }
    }

    #[test]
    fn two_against_one_wins() {
        let ds = synth::two_blobs(40, 2);
        let members = vec![
            constant_member(&ds, 0, 1),
            constant_member(&ds, 0, 2),
            constant_member(&ds, 1, 3),
        ];
        let ens = VotingEnsemble::from_members(members, vec![0.5, 0.5]).unwrap();
        for inst in ds.instances() {
            assert_eq!(ens.vote(inst).unwrap(), 0);
        }
    }

    #[test]
    fn exact_tie_falls_to_the_higher_prior() {
        let ds = synth::two_blobs(40, 2);
        let members = vec![constant_member(&ds, 0, 1), constant_member(&ds, 1, 2)];
        let lean_a = VotingEnsemble::from_members(
            vec![
                constant_member(&ds, 0, 1),
                constant_member(&ds, 1, 2),
            ],
            vec![0.6, 0.4],
        )
        .unwrap();
        let lean_b = VotingEnsemble::from_members(members, vec![0.4, 0.6]).unwrap();
        let q = &ds.instances()[0];
        assert_eq!(lean_a.vote(q).unwrap(), 0);
        assert_eq!(lean_b.vote(q).unwrap(), 1);
    }

    #[test]
    fn member_order_never_matters() {
        let ds = synth::trio(90, 4);
        let forward = vec![
            LearnerSpec::knn(5),
            LearnerSpec::NaiveBayes,
            LearnerSpec::decision_tree(),
        ];
        let backward: Vec<LearnerSpec> = forward.iter().rev().cloned().collect();
        let a = build_ensemble(&forward, &ds, EnsembleMode::Plain, 9).unwrap();
        let b = build_ensemble(&backward, &ds, EnsembleMode::Plain, 9).unwrap();
        for inst in ds.instances() {
            assert_eq!(a.vote(inst).unwrap(), b.vote(inst).unwrap());
        }
    }

    #[test]
    fn clean_data_reduces_filtered_to_plain() {
        // Clusters 10 units apart: every out-of-fold judge call is
        // right, so filtering changes no member.
        let insts: Vec<Instance> = (0..40)
            .map(|i| {
                let side = i % 2;
                Instance {
                    values: vec![Value::Num((i / 2) as f64 * 0.01 + side as f64 * 10.0)],
                    label: side,
                }
            })
            .collect();
        let ds = Dataset::new(
            "farpair",
            vec![FeatureDescriptor::numeric("x")],
            vec!["a".into(), "b".into()],
            insts,
        )
        .unwrap();
        let specs = vec![LearnerSpec::knn(5), LearnerSpec::decision_tree()];
        let plain = build_ensemble(&specs, &ds, EnsembleMode::Plain, 7).unwrap();
        let filtered =
            build_ensemble(&specs, &ds, EnsembleMode::Filtered { folds: 10 }, 7).unwrap();
        for inst in ds.instances() {
            assert_eq!(plain.vote(inst).unwrap(), filtered.vote(inst).unwrap());
        }
    }

    #[test]
    fn weighted_members_train_end_to_end() {
        let ds = synth::trio(90, 6);
        let specs = vec![
            LearnerSpec::knn(5),
            LearnerSpec::NaiveBayes,
            LearnerSpec::decision_tree(),
        ];
        let ens = build_ensemble(&specs, &ds, EnsembleMode::Weighted { folds: 10 }, 2).unwrap();
        let acc = ds
            .instances()
            .iter()
            .filter(|i| ens.vote(i).unwrap() == i.label)
            .count() as f64
            / 90.0;
        assert!(acc > 0.8, "{acc}");
    }

    #[test]
    fn reference_committee_is_fixed() {
        let specs = three_ensemble_specs();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[0].to_string(), "knn:k=5");
        assert!(specs[1].to_string().starts_with("mlp:"));
        assert!(specs[2].to_string().starts_with("rf:"));
    }
}
