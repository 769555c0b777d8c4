//! The experiment harness. A run grid is (dataset x run x noise level):
//! each context shuffles its dataset, splits it 2/3 train 1/3 test with
//! class stratification, corrupts only the training labels at the
//! context's rate, applies every configured treatment, and measures
//! accuracy on the untouched test set. Contexts execute in parallel and
//! reduce in a fixed order, so a master seed pins the whole report
//! byte-for-byte regardless of thread count.
//!
//! Treatments come in two shapes. Per-learner treatments transform the
//! training data (or derive instance weights) and then train each
//! configured learner: nothing, correctness weighting, correctness
//! filtering, the learner's own confidence as weights or filter, and
//! the classical baselines. Ensemble treatments ignore the learner list
//! and vote a committee directly: the diverse set plain, weighted, or
//! filtered, and the fixed three-member reference.

pub mod report;
pub mod stats;

pub use stats::{
    accuracy, percent_reduction_in_error, wilcoxon_signed_rank, wilcoxon_signed_rank_mode,
    win_tie_loss, Direction, WilcoxonMode, WilcoxonOutcome, DEFAULT_TIE_TOL,
};

use crate::data::{inject_label_noise, shuffle, stratified_split, Dataset, NoiseSpec};
use crate::ensemble::{build_ensemble, three_ensemble_specs, EnsembleMode};
use crate::learners::{registry, train, LearnerSpec};
use crate::noiseid::{
    biased_scores, biased_weights, classification_filter, cvc_filter, default_classification_judge,
    default_trio, ensemble_filter, estimate_correctness, iterative_partitioning_filter, l_filter,
    l_weights, renn_filter, CorrectnessScores, FilterMode,
};
use crate::rng::derive_seed;
use crate::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technique {
    None,
    LWeight,
    LFilter,
    BiasedWeight,
    BiasedFilter,
    Renn,
    Classification,
    EnsembleFilter,
    Cvc,
    Ipf,
    LEnsemble,
    ThreeEnsemble,
    WeightedLEnsemble,
    FilteredLEnsemble,
}

impl Technique {
    pub const ALL: [Technique; 14] = [
        Technique::None,
        Technique::LWeight,
        Technique::LFilter,
        Technique::BiasedWeight,
        Technique::BiasedFilter,
        Technique::Renn,
        Technique::Classification,
        Technique::EnsembleFilter,
        Technique::Cvc,
        Technique::Ipf,
        Technique::LEnsemble,
        Technique::ThreeEnsemble,
        Technique::WeightedLEnsemble,
        Technique::FilteredLEnsemble,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Technique::None => "none",
            Technique::LWeight => "l_weight",
            Technique::LFilter => "l_filter",
            Technique::BiasedWeight => "biased_weight",
            Technique::BiasedFilter => "biased_filter",
            Technique::Renn => "renn",
            Technique::Classification => "classification",
            Technique::EnsembleFilter => "ensemble_filter",
            Technique::Cvc => "cvc",
            Technique::Ipf => "ipf",
            Technique::LEnsemble => "l_ensemble",
            Technique::ThreeEnsemble => "3_ensemble",
            Technique::WeightedLEnsemble => "weighted_l_ensemble",
            Technique::FilteredLEnsemble => "filtered_l_ensemble",
        }
    }

    /// Ensemble treatments vote a committee instead of training the
    /// configured learners; their records carry "-" as the learner.
    pub fn is_ensemble(self) -> bool {
        matches!(
            self,
            Technique::LEnsemble
                | Technique::ThreeEnsemble
                | Technique::WeightedLEnsemble
                | Technique::FilteredLEnsemble
        )
    }

    fn needs_correctness(self) -> bool {
        matches!(self, Technique::LWeight | Technique::LFilter)
    }

    fn needs_diverse_set(self) -> bool {
        matches!(
            self,
            Technique::LWeight
                | Technique::LFilter
                | Technique::LEnsemble
                | Technique::WeightedLEnsemble
                | Technique::FilteredLEnsemble
        )
    }
}

// Display/FromStr are the serialization surface for records and CLI.
impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Technique {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Technique::ALL
            .into_iter()
            .find(|t| t.token() == s)
            .ok_or_else(|| Error::Argument(format!("unknown technique {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub corpus: Vec<Dataset>,
    /// Learners evaluated under each per-learner technique.
    pub learners: Vec<LearnerSpec>,
    pub techniques: Vec<Technique>,
    /// Training-label corruption rates, each in [0,1).
    pub levels: Vec<f64>,
    pub runs: usize,
    pub folds: usize,
    pub seed: u64,
    /// The diverse set behind correctness scores and the voted
    /// ensembles; derive it with the diversity pipeline or configure it
    /// directly. Defaults to the full registry.
    pub diverse: Vec<LearnerSpec>,
    pub filter_threshold: f64,
}

impl ExperimentConfig {
    pub fn new(corpus: Vec<Dataset>) -> Self {
        ExperimentConfig {
            corpus,
            learners: registry(),
            techniques: Technique::ALL.to_vec(),
            levels: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            runs: 10,
            folds: 10,
            seed: 0,
            diverse: registry(),
            filter_threshold: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.corpus.is_empty() {
            return Err(Error::Argument("empty corpus".into()));
        }
        if self.techniques.is_empty() {
            return Err(Error::Argument("no techniques configured".into()));
        }
        if self.runs == 0 {
            return Err(Error::Argument("runs must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Argument("folds must be at least 2".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Argument("no noise levels configured".into()));
        }
        for &v in &self.levels {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Argument(format!("noise level {v} outside [0,1)")));
            }
        }
        if !(self.filter_threshold > 0.0 && self.filter_threshold <= 1.0) {
            return Err(Error::Argument(format!(
                "filter threshold {} outside (0,1]",
                self.filter_threshold
            )));
        }
        if self.techniques.iter().any(|t| !t.is_ensemble()) && self.learners.is_empty() {
            return Err(Error::Argument(
                "per-learner techniques configured with no learners".into(),
            ));
        }
        if self.techniques.iter().any(|t| t.needs_diverse_set()) && self.diverse.is_empty() {
            return Err(Error::Argument(
                "correctness-based techniques configured with an empty diverse set".into(),
            ));
        }
        Ok(())
    }
}

/// One measured cell: a technique (and learner, for per-learner
/// techniques) at one noise level in one run on one dataset. Failures
/// are data, not aborts; the message replaces the accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub dataset: String,
    /// Learner token, or "-" for ensemble techniques.
    pub learner: String,
    pub technique: Technique,
    pub level: f64,
    pub run: usize,
    pub outcome: std::result::Result<f64, String>,
}

impl CellRecord {
    fn sort_key(&self) -> (String, String, &'static str, u64, usize) {
        (
            self.dataset.clone(),
            self.learner.clone(),
            self.technique.token(),
            self.level.to_bits(),
            self.run,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<CellRecord>,
}

impl ExperimentReport {
    /// Machine-readable form, one tab-separated line per record, fully
    /// sorted; stable bytes for a given config and seed.
    pub fn to_records_text(&self) -> String {
        let mut out = String::from("experiment-records v1\n");
        out.push_str(&format!("records: {}\n", self.records.len()));
        for r in &self.records {
            let tail = match &r.outcome {
                Ok(acc) => format!("ok\t{acc}"),
                Err(msg) => format!("err\t{}", msg.replace(['\t', '\n'], " ")),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.dataset,
                r.learner,
                r.technique.token(),
                r.level,
                r.run,
                tail
            ));
        }
        out
    }

    pub fn from_records_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != "experiment-records v1" {
            return Err(Error::Format(format!("unexpected header: {header:?}")));
        }
        let count_line = lines.next().unwrap_or("");
        let expected: usize = count_line
            .strip_prefix("records: ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad count line {count_line:?}")))?;
        let mut records = Vec::with_capacity(expected);
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 7 {
                return Err(Error::Format(format!("bad record line {line:?}")));
            }
            let outcome = match parts[5] {
                "ok" => Ok(parts[6]
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad accuracy {:?}", parts[6])))?),
                "err" => Err(parts[6].to_string()),
                other => return Err(Error::Format(format!("bad outcome tag {other:?}"))),
            };
            records.push(CellRecord {
                dataset: parts[0].to_string(),
                learner: parts[1].to_string(),
                technique: parts[2].parse()?,
                level: parts[3]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad level {:?}", parts[3])))?,
                run: parts[4]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad run {:?}", parts[4])))?,
                outcome,
            });
        }
        if records.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} records, found {}",
                records.len()
            )));
        }
        Ok(ExperimentReport { records })
    }

    pub fn datasets(&self) -> Vec<String> {
        let mut names: Vec<String> = self.records.iter().map(|r| r.dataset.clone()).collect();
        names.sort();
        names.dedup();
        names
    }

    fn mean_where(&self, pred: impl Fn(&CellRecord) -> bool) -> Option<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for r in &self.records {
            if let Ok(acc) = r.outcome {
                if pred(r) {
                    total += acc;
                    count += 1;
                }
            }
        }
        (count > 0).then(|| total / count as f64)
    }

    /// Mean accuracy over every successful run and dataset for one
    /// (learner, technique, level) cell group.
    pub fn mean_accuracy(&self, learner: &str, technique: Technique, level: f64) -> Option<f64> {
        self.mean_where(|r| r.learner == learner && r.technique == technique && r.level == level)
    }

    /// Mean accuracy over runs within one dataset.
    pub fn dataset_mean(
        &self,
        dataset: &str,
        learner: &str,
        technique: Technique,
        level: f64,
    ) -> Option<f64> {
        self.mean_where(|r| {
            r.dataset == dataset
                && r.learner == learner
                && r.technique == technique
                && r.level == level
        })
    }

    pub fn error_count(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }
}

/// Executes the full grid. Per-cell failures are recorded and do not
/// stop the run; configuration errors fail fast.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let contexts: Vec<(usize, usize, usize)> = (0..cfg.corpus.len())
        .flat_map(|d| {
            (0..cfg.runs).flat_map(move |r| (0..cfg.levels.len()).map(move |l| (d, r, l)))
        })
        .collect();

    let per_context: Vec<Vec<CellRecord>> = contexts
        .par_iter()
        .map(|&(d, r, l)| run_context(cfg, d, r, l))
        .collect();

    let mut records: Vec<CellRecord> = per_context.into_iter().flatten().collect();
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(ExperimentReport { records })
}

/// Training data as one treatment sees it.
struct Prepared {
    ds: Dataset,
    weights: Option<Vec<f64>>,
}

fn run_context(cfg: &ExperimentConfig, d: usize, run: usize, level_idx: usize) -> Vec<CellRecord> {
    let ds = &cfg.corpus[d];
    let level = cfg.levels[level_idx];
    let run_seed = derive_seed(cfg.seed, &[&run.to_string(), ds.name()]);
    let ctx_seed = derive_seed(run_seed, &["level", &level.to_string()]);

    let record = |learner: &str, technique: Technique, outcome: std::result::Result<f64, String>| {
        CellRecord {
            dataset: ds.name().to_string(),
            learner: learner.to_string(),
            technique,
            level,
            run,
            outcome,
        }
    };

    // Shuffle, split, corrupt. A failure here poisons the whole context.
    let staged = (|| -> Result<(Dataset, Dataset)> {
        let shuffled = shuffle(ds, derive_seed(run_seed, &["shuffle"]));
        let (train_ds, test_ds) =
            stratified_split(&shuffled, 2.0 / 3.0, derive_seed(run_seed, &["split"]))?;
        if level > 0.0 {
            let spec = NoiseSpec::new(level, derive_seed(ctx_seed, &["noise"]));
            let (noisy, _) = inject_label_noise(&train_ds, &spec)?;
            Ok((noisy, test_ds))
        } else {
            Ok((train_ds, test_ds))
        }
    })();
    let (train_ds, test_ds) = match staged {
        Ok(pair) => pair,
        Err(e) => {
            let msg = format!("context staging failed: {e}");
            let mut out = Vec::new();
            for &t in &cfg.techniques {
                if t.is_ensemble() {
                    out.push(record("-", t, Err(msg.clone())));
                } else {
                    for spec in &cfg.learners {
                        out.push(record(&spec.to_string(), t, Err(msg.clone())));
                    }
                }
            }
            return out;
        }
    };

    let test_labels = test_ds.labels();
    let measure_model = |model: &crate::learners::Model| -> Result<f64> {
        let preds: Vec<usize> = test_ds
            .instances()
            .iter()
            .map(|inst| model.predict(inst))
            .collect::<Result<_>>()?;
        accuracy(&preds, &test_labels)
    };

    // Correctness scores are shared by the weight and filter treatments.
    let correctness: Option<std::result::Result<CorrectnessScores, String>> = cfg
        .techniques
        .iter()
        .any(|t| t.needs_correctness())
        .then(|| {
            estimate_correctness(
                &cfg.diverse,
                &train_ds,
                cfg.folds,
                derive_seed(ctx_seed, &["correct"]),
            )
            .map_err(|e| e.to_string())
        });

    let mut out = Vec::new();
    for &tech in &cfg.techniques {
        if tech.is_ensemble() {
            let outcome = (|| -> Result<f64> {
                let seed = derive_seed(ctx_seed, &["ens", tech.token()]);
                let ensemble = match tech {
                    Technique::LEnsemble => {
                        build_ensemble(&cfg.diverse, &train_ds, EnsembleMode::Plain, seed)?
                    }
                    Technique::ThreeEnsemble => build_ensemble(
                        &three_ensemble_specs(),
                        &train_ds,
                        EnsembleMode::Plain,
                        seed,
                    )?,
                    Technique::WeightedLEnsemble => build_ensemble(
                        &cfg.diverse,
                        &train_ds,
                        EnsembleMode::Weighted { folds: cfg.folds },
                        seed,
                    )?,
                    Technique::FilteredLEnsemble => build_ensemble(
                        &cfg.diverse,
                        &train_ds,
                        EnsembleMode::Filtered { folds: cfg.folds },
                        seed,
                    )?,
                    _ => unreachable!("covered by is_ensemble"),
                };
                let preds: Vec<usize> = test_ds
                    .instances()
                    .iter()
                    .map(|inst| ensemble.vote(inst))
                    .collect::<Result<_>>()?;
                accuracy(&preds, &test_labels)
            })();
            out.push(record("-", tech, outcome.map_err(|e| e.to_string())));
            continue;
        }

        // Learner-independent preparation, computed once per technique.
        let shared: Option<std::result::Result<Prepared, String>> = match tech {
            Technique::None => Some(Ok(Prepared {
                ds: train_ds.clone(),
                weights: None,
            })),
            Technique::LWeight => Some(match correctness.as_ref().expect("requested above") {
                Ok(s) => Ok(Prepared {
                    ds: train_ds.clone(),
                    weights: Some(l_weights(s)),
                }),
                Err(e) => Err(e.clone()),
            }),
            Technique::LFilter => Some(match correctness.as_ref().expect("requested above") {
                Ok(s) => l_filter(&train_ds, s, cfg.filter_threshold)
                    .map(|o| Prepared {
                        ds: train_ds.subset(&o.kept),
                        weights: None,
                    })
                    .map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            }),
            Technique::Renn => Some(
                renn_filter(&train_ds, 5)
                    .map(|o| Prepared {
                        ds: train_ds.subset(&o.kept),
                        weights: None,
                    })
                    .map_err(|e| e.to_string()),
            ),
            Technique::Classification => Some(
                classification_filter(
                    &train_ds,
                    &default_classification_judge(),
                    cfg.folds,
                    derive_seed(ctx_seed, &["classification"]),
                )
                .map(|o| Prepared {
                    ds: train_ds.subset(&o.kept),
                    weights: None,
                })
                .map_err(|e| e.to_string()),
            ),
            Technique::EnsembleFilter => Some(
                ensemble_filter(
                    &train_ds,
                    &default_trio(),
                    FilterMode::Consensus,
                    cfg.folds,
                    derive_seed(ctx_seed, &["committee"]),
                )
                .map(|o| Prepared {
                    ds: train_ds.subset(&o.kept),
                    weights: None,
                })
                .map_err(|e| e.to_string()),
            ),
            Technique::Cvc => Some(
                cvc_filter(
                    &train_ds,
                    3,
                    &LearnerSpec::decision_tree(),
                    derive_seed(ctx_seed, &["cvc"]),
                )
                .map(|o| Prepared {
                    ds: train_ds.subset(&o.kept),
                    weights: None,
                })
                .map_err(|e| e.to_string()),
            ),
            Technique::Ipf => Some(
                iterative_partitioning_filter(&train_ds, 3, derive_seed(ctx_seed, &["ipf"]))
                    .map(|o| Prepared {
                        ds: train_ds.subset(&o.kept),
                        weights: None,
                    })
                    .map_err(|e| e.to_string()),
            ),
            Technique::BiasedWeight | Technique::BiasedFilter => None,
            _ => unreachable!("ensembles handled above"),
        };

        for spec in &cfg.learners {
            let token = spec.to_string();
            let outcome: std::result::Result<f64, String> = (|| {
                let prepared = match &shared {
                    Some(Ok(p)) => Prepared {
                        ds: p.ds.clone(),
                        weights: p.weights.clone(),
                    },
                    Some(Err(e)) => return Err(e.clone()),
                    None => match tech {
                        Technique::BiasedWeight => {
                            let s = biased_scores(
                                spec,
                                &train_ds,
                                cfg.folds,
                                derive_seed(ctx_seed, &["bias", &token]),
                            )
                            .map_err(|e| e.to_string())?;
                            Prepared {
                                ds: train_ds.clone(),
                                weights: Some(biased_weights(&s)),
                            }
                        }
                        Technique::BiasedFilter => {
                            let o = classification_filter(
                                &train_ds,
                                spec,
                                cfg.folds,
                                derive_seed(ctx_seed, &["bias", &token]),
                            )
                            .map_err(|e| e.to_string())?;
                            Prepared {
                                ds: train_ds.subset(&o.kept),
                                weights: None,
                            }
                        }
                        _ => unreachable!("only biased treatments lack shared prep"),
                    },
                };
                let model = train(
                    spec,
                    &prepared.ds,
                    prepared.weights.as_deref(),
                    derive_seed(ctx_seed, &["fit", tech.token(), &token]),
                )
                .map_err(|e| e.to_string())?;
                measure_model(&model).map_err(|e| e.to_string())
            })();
            out.push(record(&token, tech, outcome));
        }
    }
    out
}
