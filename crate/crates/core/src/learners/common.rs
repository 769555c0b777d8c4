//! Shared plumbing for the base classifiers: missing-value resolution,
//! scaling, the mixed-type distance, weighted priors, and the one
//! tie-breaking rule every vote in the crate uses.

use crate::data::{ClassId, Dataset, FeatureKind, Instance, Value};
use crate::{Error, Result};

/// A resolved feature value: numerics imputed, categoricals as a slot
/// index where slot `category_count` stands for "missing".
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Rv {
    Num(f64),
    Cat(usize),
}

enum PrepFeature {
    Num { mean: f64, min: f64, range: f64 },
    Cat { slots: usize },
}

/// Per-feature training statistics. Missing numerics resolve to the
/// training mean; missing categoricals become their own category slot.
/// Numeric scaling is min-max over the training values.
pub(crate) struct Preprocessor {
    feats: Vec<PrepFeature>,
}

impl Preprocessor {
    pub fn fit(ds: &Dataset) -> Self {
        let feats = ds
            .features()
            .iter()
            .enumerate()
            .map(|(f, desc)| match &desc.kind {
                FeatureKind::Categorical { categories } => PrepFeature::Cat {
                    slots: categories.len() + 1,
                },
                FeatureKind::Numeric => {
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    let mut min = f64::INFINITY;
                    let mut max = f64::NEG_INFINITY;
                    for inst in ds.instances() {
                        if let Value::Num(x) = inst.values[f] {
                            sum += x;
                            count += 1;
                            min = min.min(x);
                            max = max.max(x);
                        }
                    }
                    if count == 0 {
                        // Column entirely missing; resolve everything to 0.
                        PrepFeature::Num {
                            mean: 0.0,
                            min: 0.0,
                            range: 0.0,
                        }
                    } else {
                        PrepFeature::Num {
                            mean: sum / count as f64,
                            min,
                            range: max - min,
                        }
                    }
                }
            })
            .collect();
        Preprocessor { feats }
    }

    pub fn resolve(&self, inst: &Instance) -> Vec<Rv> {
        inst.values
            .iter()
            .zip(&self.feats)
            .map(|(v, p)| match (v, p) {
                (Value::Num(x), _) => Rv::Num(*x),
                (Value::Cat(c), _) => Rv::Cat(*c),
                (Value::Missing, PrepFeature::Num { mean, .. }) => Rv::Num(*mean),
                (Value::Missing, PrepFeature::Cat { slots }) => Rv::Cat(slots - 1),
            })
            .collect()
    }

    pub fn resolve_all(&self, ds: &Dataset) -> Vec<Vec<Rv>> {
        ds.instances().iter().map(|i| self.resolve(i)).collect()
    }

    /// Mixed-type distance: range-scaled absolute difference on numerics,
    /// 0/1 overlap on categoricals, combined as a Euclidean norm. A
    /// zero-range numeric column contributes 0 on equality and 1 otherwise.
    pub fn heom(&self, a: &[Rv], b: &[Rv]) -> f64 {
        let mut sq = 0.0;
        for ((va, vb), p) in a.iter().zip(b).zip(&self.feats) {
            let d = match (va, vb, p) {
                (Rv::Num(x), Rv::Num(y), PrepFeature::Num { range, .. }) => {
                    if *range > 0.0 {
                        ((x - y) / range).abs().min(1.0)
                    } else if x == y {
                        0.0
                    } else {
                        1.0
                    }
                }
                (Rv::Cat(x), Rv::Cat(y), _) => {
                    if x == y {
                        0.0
                    } else {
                        1.0
                    }
                }
                _ => 1.0,
            };
            sq += d * d;
        }
        sq.sqrt()
    }

    /// Width of the scaled/one-hot encoding used by the perceptron.
    pub fn encoded_width(&self) -> usize {
        self.feats
            .iter()
            .map(|p| match p {
                PrepFeature::Num { .. } => 1,
                PrepFeature::Cat { slots } => *slots,
            })
            .sum()
    }

    /// Scaled numeric / one-hot categorical encoding, appended to `out`.
    pub fn encode_scaled(&self, row: &[Rv], out: &mut Vec<f64>) {
        for (v, p) in row.iter().zip(&self.feats) {
            match (v, p) {
                (Rv::Num(x), PrepFeature::Num { min, range, .. }) => {
                    out.push(if *range > 0.0 {
                        ((x - min) / range).clamp(0.0, 1.0)
                    } else {
                        0.0
                    });
                }
                (Rv::Cat(c), PrepFeature::Cat { slots }) => {
                    let base = out.len();
                    out.resize(base + slots, 0.0);
                    out[base + (*c).min(slots - 1)] = 1.0;
                }
                _ => unreachable!("resolved values match their column kinds"),
            }
        }
    }

    pub fn is_numeric(&self, f: usize) -> bool {
        matches!(self.feats[f], PrepFeature::Num { .. })
    }

    /// Category slot count (including the missing slot); 0 for numerics.
    pub fn slots(&self, f: usize) -> usize {
        match self.feats[f] {
            PrepFeature::Num { .. } => 0,
            PrepFeature::Cat { slots } => slots,
        }
    }

    pub fn n_features(&self) -> usize {
        self.feats.len()
    }
}

/// Weighted class proportions; sums to 1 whenever any weight is positive.
pub(crate) fn weighted_priors(labels: &[ClassId], weights: &[f64], n_classes: usize) -> Vec<f64> {
    let mut priors = vec![0.0; n_classes];
    for (&y, &w) in labels.iter().zip(weights) {
        priors[y] += w;
    }
    let total: f64 = priors.iter().sum();
    if total > 0.0 {
        for p in priors.iter_mut() {
            *p /= total;
        }
    }
    priors
}

/// The crate-wide vote rule: highest value wins, exact ties go to the
/// class with the higher prior, remaining ties to the lower class index.
pub(crate) fn pick_argmax(values: &[f64], priors: &[f64]) -> usize {
    let mut best = 0;
    for c in 1..values.len() {
        if values[c] > values[best]
            || (values[c] == values[best] && priors[c] > priors[best])
        {
            best = c;
        }
    }
    best
}

pub(crate) fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// Validates a training weight vector: right arity, finite, non-negative,
/// not everywhere zero.
pub(crate) fn check_weights(ds: &Dataset, weights: &[f64]) -> Result<()> {
    if weights.len() != ds.len() {
        return Err(Error::Argument(format!(
            "weight vector has {} entries for {} instances",
            weights.len(),
            ds.len()
        )));
    }
    let mut total = 0.0;
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Argument(format!("invalid instance weight {w}")));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::Argument("all instance weights are zero".into()));
    }
    Ok(())
}

/// Rescales weights to mean 1. Count-based learners apply this before
/// training so that additive constants (smoothing, minimum leaf weight)
/// keep predictions invariant under positive rescaling of the input
/// weights.
pub(crate) fn normalize_mean_one(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let scale = weights.len() as f64 / total;
    weights.iter().map(|w| w * scale).collect()
}

/// Sorts candidate neighbors by (distance, original index) and returns
/// the first `k`. Shared by the two instance-based learners so they
/// break distance ties identically.
pub(crate) fn nearest_k(dists: &mut Vec<(f64, usize)>, k: usize) -> &[(f64, usize)] {
    dists.sort_unstable_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("distances are finite")
            .then(a.1.cmp(&b.1))
    });
    &dists[..k.min(dists.len())]
}
