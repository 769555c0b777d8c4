/*!
Base classifiers.

Seven classifier families, all implemented here rather than wrapped from
external crates because every one of them has to honor the same two
contracts that off-the-shelf implementations do not offer together:

* training accepts a per-instance weight vector (counts become weight
  sums; the perceptron scales its error term; the forest draws its
  bootstrap from the weight distribution);
* every trained model reports, besides a prediction, a per-class score
  usable as an estimate of how strongly the model associates an input
  with a label.

A [`LearnerSpec`] names a family plus hyperparameters and round-trips
through a compact token syntax (`knn:k=5`, `rf:trees=50`, ...) used by
config files, output artifacts, and seed derivation. Training is
deterministic in (spec, data, weights, seed).

Tie conventions, everywhere: neighbor ties break toward the lower
training index; vote and score ties break toward the higher trained
prior, then the lower class index.
*/

mod common;
mod forest;
mod knn;
mod lwl;
mod mlp;
mod naive_bayes;
mod rules;
mod tree;

pub(crate) use common::{nearest_k, pick_argmax, uniform_weights, weighted_priors, Preprocessor};

use crate::data::{ClassId, Dataset, Instance};
use crate::diversity::PredictionRecord;
use crate::rng::derive_seed;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum LearnerSpec {
    /// k-nearest-neighbor plurality vote, mixed-type distance.
    Knn { k: usize },
    /// Gaussian/categorical naive Bayes with Laplace smoothing.
    NaiveBayes,
    /// Gain-ratio decision tree with pessimistic-error pruning.
    DecisionTree { confidence: f64, min_leaf: f64 },
    /// Bagged random-subspace trees; weights drive the bootstrap.
    RandomForest { trees: usize, features: Option<usize> },
    /// One-hidden-layer sigmoid perceptron trained by backpropagation.
    Mlp {
        hidden: Option<usize>,
        epochs: usize,
        rate: f64,
    },
    /// Grow-and-prune ordered rule list (separate-and-conquer).
    RuleLearner { max_rules: usize, min_coverage: f64 },
    /// Locally weighted vote: neighbors vote with kernel 1/(1+d).
    Lwl { k: usize },
}

impl LearnerSpec {
    pub fn knn(k: usize) -> Self {
        LearnerSpec::Knn { k }
    }

    pub fn naive_bayes() -> Self {
        LearnerSpec::NaiveBayes
    }

    pub fn decision_tree() -> Self {
        LearnerSpec::DecisionTree {
            confidence: 0.25,
            min_leaf: 2.0,
        }
    }

    pub fn random_forest(trees: usize) -> Self {
        LearnerSpec::RandomForest {
            trees,
            features: None,
        }
    }

    pub fn mlp() -> Self {
        LearnerSpec::Mlp {
            hidden: None,
            epochs: 200,
            rate: 0.3,
        }
    }

    pub fn rule_learner() -> Self {
        LearnerSpec::RuleLearner {
            max_rules: 8,
            min_coverage: 1.0,
        }
    }

    pub fn lwl(k: usize) -> Self {
        LearnerSpec::Lwl { k }
    }

    /// Canonical token, stable across runs; feeds seed derivation and
    /// every serialized artifact.
    pub fn token(&self) -> String {
        self.to_string()
    }
}

/// The default registry: one spec per family, defaults throughout.
pub fn registry() -> Vec<LearnerSpec> {
    vec![
        LearnerSpec::knn(5),
        LearnerSpec::naive_bayes(),
        LearnerSpec::decision_tree(),
        LearnerSpec::random_forest(50),
        LearnerSpec::mlp(),
        LearnerSpec::rule_learner(),
        LearnerSpec::lwl(15),
    ]
}

impl std::fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LearnerSpec::Knn { k } => write!(f, "knn:k={k}"),
            LearnerSpec::NaiveBayes => write!(f, "nb"),
            LearnerSpec::DecisionTree {
                confidence,
                min_leaf,
            } => write!(f, "tree:cf={confidence},leaf={min_leaf}"),
            LearnerSpec::RandomForest { trees, features } => match features {
                Some(m) => write!(f, "rf:trees={trees},feats={m}"),
                None => write!(f, "rf:trees={trees}"),
            },
            LearnerSpec::Mlp {
                hidden,
                epochs,
                rate,
            } => match hidden {
                Some(h) => write!(f, "mlp:hidden={h},epochs={epochs},lr={rate}"),
                None => write!(f, "mlp:epochs={epochs},lr={rate}"),
            },
            LearnerSpec::RuleLearner {
                max_rules,
                min_coverage,
            } => write!(f, "rules:max={max_rules},cover={min_coverage}"),
            LearnerSpec::Lwl { k } => write!(f, "lwl:k={k}"),
        }
    }
}

impl std::str::FromStr for LearnerSpec {
    type Err = Error;

    /// Parses `kind` or `kind:key=value,...`. Long aliases
    /// (`naive_bayes`, `decision_tree`, `random_forest`, `rule_learner`)
    /// are accepted alongside the short tokens.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, params) = match s.split_once(':') {
            Some((k, p)) => (k, p),
            None => (s, ""),
        };
        let mut pairs = Vec::new();
        if !params.is_empty() {
            for item in params.split(',') {
                let (key, value) = item.split_once('=').ok_or_else(|| {
                    Error::Argument(format!("learner parameter {item:?} is not key=value"))
                })?;
                pairs.push((key.trim(), value.trim()));
            }
        }

        fn usize_param(key: &str, value: &str) -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|_| Error::Argument(format!("parameter {key}={value:?} is not a count")))
        }
        fn f64_param(key: &str, value: &str) -> Result<f64> {
            value
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Argument(format!("parameter {key}={value:?} is not a number")))
        }
        let unknown = |kind: &str, key: &str| {
            Error::Argument(format!("learner {kind} has no parameter {key:?}"))
        };

        match kind {
            "knn" => {
                let mut k = 5;
                for (key, value) in pairs {
                    match key {
                        "k" => k = usize_param(key, value)?,
                        _ => return Err(unknown(kind, key)),
                    }
                }
                if k == 0 {
                    return Err(Error::Argument("knn needs k >= 1".into()));
                }
                Ok(LearnerSpec::Knn { k })
            }
            "nb" | "naive_bayes" => {
                if let Some((key, _)) = pairs.first() {
                    return Err(unknown("nb", key));
                }
                Ok(LearnerSpec::NaiveBayes)
            }
            "tree" | "decision_tree" => {
                let mut spec = LearnerSpec::decision_tree();
                if let LearnerSpec::DecisionTree {
                    confidence,
                    min_leaf,
                } = &mut spec
                {
                    for (key, value) in pairs {
                        match key {
                            "cf" => *confidence = f64_param(key, value)?,
                            "leaf" => *min_leaf = f64_param(key, value)?,
                            _ => return Err(unknown("tree", key)),
                        }
                    }
                    if !(*confidence > 0.0 && *confidence <= 0.5) {
                        return Err(Error::Argument(
                            "tree pruning confidence must lie in (0, 0.5]".into(),
                        ));
                    }
                    if *min_leaf <= 0.0 {
                        return Err(Error::Argument("tree minimum leaf weight must be positive".into()));
                    }
                }
                Ok(spec)
            }
            "rf" | "random_forest" => {
                let mut trees = 50;
                let mut features = None;
                for (key, value) in pairs {
                    match key {
                        "trees" => trees = usize_param(key, value)?,
                        "feats" => {
                            features = if value == "auto" {
                                None
                            } else {
                                Some(usize_param(key, value)?)
                            }
                        }
                        _ => return Err(unknown("rf", key)),
                    }
                }
                if trees == 0 {
                    return Err(Error::Argument("random forest needs at least one tree".into()));
                }
                Ok(LearnerSpec::RandomForest { trees, features })
            }
            "mlp" => {
                let mut spec = LearnerSpec::mlp();
                if let LearnerSpec::Mlp {
                    hidden,
                    epochs,
                    rate,
                } = &mut spec
                {
                    for (key, value) in pairs {
                        match key {
                            "hidden" => {
                                *hidden = if value == "auto" {
                                    None
                                } else {
                                    Some(usize_param(key, value)?)
                                }
                            }
                            "epochs" => *epochs = usize_param(key, value)?,
                            "lr" => *rate = f64_param(key, value)?,
                            _ => return Err(unknown("mlp", key)),
                        }
                    }
                    if *rate <= 0.0 {
                        return Err(Error::Argument("mlp learning rate must be positive".into()));
                    }
                }
                Ok(spec)
            }
            "rules" | "rule_learner" => {
                let mut spec = LearnerSpec::rule_learner();
                if let LearnerSpec::RuleLearner {
                    max_rules,
                    min_coverage,
                } = &mut spec
                {
                    for (key, value) in pairs {
                        match key {
                            "max" => *max_rules = usize_param(key, value)?,
                            "cover" => *min_coverage = f64_param(key, value)?,
                            _ => return Err(unknown("rules", key)),
                        }
                    }
                }
                Ok(spec)
            }
            "lwl" => {
                let mut k = 15;
                for (key, value) in pairs {
                    match key {
                        "k" => k = usize_param(key, value)?,
                        _ => return Err(unknown(kind, key)),
                    }
                }
                if k == 0 {
                    return Err(Error::Argument("lwl needs k >= 1".into()));
                }
                Ok(LearnerSpec::Lwl { k })
            }
            other => Err(Error::Argument(format!("unknown learner kind {other:?}"))),
        }
    }
}

/// Parses a comma-separated learner list (`knn:k=5,nb,rf:trees=30`).
/// Learner parameters use `=` internally, so commas both separate
/// learners and their parameters; a parameter belongs to the most recent
/// learner token.
pub fn parse_learner_list(s: &str) -> Result<Vec<LearnerSpec>> {
    let mut specs = Vec::new();
    let mut current = String::new();
    for piece in s.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        // A piece containing '=' but no ':' continues the previous token.
        if piece.contains('=') && !piece.contains(':') && !current.is_empty() {
            current.push(',');
            current.push_str(piece);
        } else {
            if !current.is_empty() {
                specs.push(current.parse()?);
            }
            current = piece.to_string();
        }
    }
    if !current.is_empty() {
        specs.push(current.parse()?);
    }
    if specs.is_empty() {
        return Err(Error::Argument("empty learner list".into()));
    }
    Ok(specs)
}

enum Inner {
    Knn(knn::KnnModel),
    Nb(naive_bayes::NbModel),
    Tree(tree::TreeModel),
    Forest(forest::ForestModel),
    Mlp(mlp::MlpModel),
    Rules(rules::RuleModel),
    Lwl(lwl::LwlModel),
}

/// A trained classifier. Prediction and scoring are immutable and
/// thread-safe; models never hold interior RNG state.
pub struct Model {
    spec: LearnerSpec,
    n_features: usize,
    n_classes: usize,
    priors: Vec<f64>,
    inner: Inner,
}

impl Model {
    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }

    /// Weighted class proportions of the training data.
    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn check_arity(&self, x: &Instance) -> Result<()> {
        if x.values.len() != self.n_features {
            return Err(Error::Argument(format!(
                "instance has {} values, model expects {}",
                x.values.len(),
                self.n_features
            )));
        }
        Ok(())
    }

    pub fn predict(&self, x: &Instance) -> Result<ClassId> {
        self.check_arity(x)?;
        Ok(match &self.inner {
            Inner::Knn(m) => m.predict(x, &self.priors),
            Inner::Nb(m) => m.predict(x, &self.priors),
            Inner::Tree(m) => m.predict(x, &self.priors),
            Inner::Forest(m) => m.predict(x, &self.priors),
            Inner::Mlp(m) => m.predict(x, &self.priors),
            Inner::Rules(m) => m.predict(x),
            Inner::Lwl(m) => m.predict(x, &self.priors),
        })
    }

    /// Per-class association scores, normalized to sum to 1.
    pub fn class_scores(&self, x: &Instance) -> Result<Vec<f64>> {
        self.check_arity(x)?;
        Ok(match &self.inner {
            Inner::Knn(m) => m.class_scores(x),
            Inner::Nb(m) => m.class_scores(x),
            Inner::Tree(m) => m.class_scores(x),
            Inner::Forest(m) => m.class_scores(x),
            Inner::Mlp(m) => m.class_scores(x),
            Inner::Rules(m) => m.class_scores(x),
            Inner::Lwl(m) => m.class_scores(x),
        })
    }

    /// The model's association between `x` and one candidate label.
    pub fn classifier_score(&self, x: &Instance, y: ClassId) -> Result<f64> {
        if y >= self.n_classes {
            return Err(Error::Argument(format!("class {y} out of range")));
        }
        Ok(self.class_scores(x)?[y])
    }
}

/// Trains a classifier. `weights` defaults to uniform; zero-weight
/// instances are treated as absent. Deterministic in all arguments.
pub fn train(
    spec: &LearnerSpec,
    ds: &Dataset,
    weights: Option<&[f64]>,
    seed: u64,
) -> Result<Model> {
    if ds.is_empty() {
        return Err(Error::Argument("cannot train on an empty dataset".into()));
    }
    let owned;
    let weights: &[f64] = match weights {
        Some(w) => {
            common::check_weights(ds, w)?;
            w
        }
        None => {
            owned = common::uniform_weights(ds.len());
            &owned
        }
    };

    let labels = ds.labels();
    let priors = weighted_priors(&labels, weights, ds.n_classes());
    let inner = match spec {
        LearnerSpec::Knn { k } => Inner::Knn(knn::fit(ds, weights, *k)),
        LearnerSpec::NaiveBayes => Inner::Nb(naive_bayes::fit(ds, weights)),
        LearnerSpec::DecisionTree {
            confidence,
            min_leaf,
        } => Inner::Tree(tree::fit(ds, weights, *confidence, *min_leaf)),
        LearnerSpec::RandomForest { trees, features } => {
            Inner::Forest(forest::fit(ds, weights, *trees, *features, seed))
        }
        LearnerSpec::Mlp {
            hidden,
            epochs,
            rate,
        } => Inner::Mlp(mlp::fit(ds, weights, *hidden, *epochs, *rate, seed)),
        LearnerSpec::RuleLearner {
            max_rules,
            min_coverage,
        } => Inner::Rules(rules::fit(ds, weights, *max_rules, *min_coverage, seed)),
        LearnerSpec::Lwl { k } => Inner::Lwl(lwl::fit(ds, weights, *k)),
    };

    Ok(Model {
        spec: spec.clone(),
        n_features: ds.features().len(),
        n_classes: ds.n_classes(),
        priors,
        inner,
    })
}

/// One out-of-fold pass: for every instance, the prediction and the
/// true-label score of a model that never saw it.
pub struct CvOutcome {
    pub predictions: Vec<ClassId>,
    pub true_label_scores: Vec<f64>,
}

/// Stratified cross-validation with uniform training weights. Each
/// instance is predicted exactly once, by the model trained on the folds
/// it does not belong to. Deterministic in (spec, ds, folds, seed).
pub fn cross_val_scored(
    spec: &LearnerSpec,
    ds: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<CvOutcome> {
    let assignment = crate::data::stratified_folds(ds, folds, derive_seed(seed, &["folds"]))?;
    let mut predictions = vec![0usize; ds.len()];
    let mut true_label_scores = vec![0.0; ds.len()];
    for (f, held_out) in assignment.iter().enumerate() {
        let mut in_fold = vec![false; ds.len()];
        for &i in held_out {
            in_fold[i] = true;
        }
        let train_idx: Vec<usize> = (0..ds.len()).filter(|&i| !in_fold[i]).collect();
        if train_idx.is_empty() {
            return Err(Error::Argument("fold leaves no training data".into()));
        }
        let model = train(
            spec,
            &ds.subset(&train_idx),
            None,
            derive_seed(seed, &["fold", &f.to_string()]),
        )
        .map_err(|e| e.in_cell(&spec.token(), ds.name()))?;
        for &i in held_out {
            let inst = &ds.instances()[i];
            let scores = model
                .class_scores(inst)
                .map_err(|e| e.in_cell(&spec.token(), ds.name()))?;
            predictions[i] = model.predict(inst)?;
            true_label_scores[i] = scores[inst.label];
        }
    }
    Ok(CvOutcome {
        predictions,
        true_label_scores,
    })
}

/// Out-of-fold predictions packaged for the diversity pipeline.
pub fn cross_val_predictions(
    spec: &LearnerSpec,
    ds: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<PredictionRecord> {
    let outcome = cross_val_scored(spec, ds, folds, seed)?;
    Ok(PredictionRecord {
        learner: spec.clone(),
        dataset: ds.name().to_string(),
        predictions: outcome.predictions,
    })
}
