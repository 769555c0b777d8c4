//! Naive Bayes: Gaussian likelihoods on numeric features, Laplace-smoothed
//! frequency tables on categorical ones, weighted throughout (counts are
//! weight sums, moments are weighted moments). Priors are unsmoothed, so
//! a class that carries all the weight really does win every prediction.

use super::common::{normalize_mean_one, pick_argmax, weighted_priors, Preprocessor, Rv};
use crate::data::{ClassId, Dataset, Instance};

struct GaussFeature {
    /// Per-class (mean, variance); variance floored for stability.
    params: Vec<(f64, f64)>,
}

struct CatFeature {
    /// [class][slot] smoothed log-probability.
    log_probs: Vec<Vec<f64>>,
}

enum NbFeature {
    Gauss(GaussFeature),
    Cat(CatFeature),
}

pub(crate) struct NbModel {
    prep: Preprocessor,
    features: Vec<NbFeature>,
    priors: Vec<f64>,
    n_classes: usize,
}

pub(crate) fn fit(ds: &Dataset, raw_weights: &[f64]) -> NbModel {
    let weights = normalize_mean_one(raw_weights);
    let prep = Preprocessor::fit(ds);
    let rows = prep.resolve_all(ds);
    let labels = ds.labels();
    let n_classes = ds.n_classes();
    let priors = weighted_priors(&labels, &weights, n_classes);

    let mut class_weight = vec![0.0; n_classes];
    for (&y, &w) in labels.iter().zip(&weights) {
        class_weight[y] += w;
    }

    let features = (0..prep.n_features())
        .map(|f| {
            if prep.is_numeric(f) {
                // Weighted mean and variance per class; a pooled-variance
                // floor keeps single-valued classes finite.
                let mut sum = vec![0.0; n_classes];
                for (row, (&y, &w)) in rows.iter().zip(labels.iter().zip(&weights)) {
                    if let Rv::Num(x) = row[f] {
                        sum[y] += w * x;
                    }
                }
                let means: Vec<f64> = (0..n_classes)
                    .map(|c| if class_weight[c] > 0.0 { sum[c] / class_weight[c] } else { 0.0 })
                    .collect();
                let mut sq = vec![0.0; n_classes];
                let mut overall_sq = 0.0;
                let mut overall_w = 0.0;
                for (row, (&y, &w)) in rows.iter().zip(labels.iter().zip(&weights)) {
                    if let Rv::Num(x) = row[f] {
                        let d = x - means[y];
                        sq[y] += w * d * d;
                        overall_sq += w * d * d;
                        overall_w += w;
                    }
                }
                let pooled = if overall_w > 0.0 { overall_sq / overall_w } else { 0.0 };
                let floor = (pooled * 1e-4).max(1e-9);
                let params = (0..n_classes)
                    .map(|c| {
                        let var = if class_weight[c] > 0.0 { sq[c] / class_weight[c] } else { 0.0 };
                        (means[c], var.max(floor))
                    })
                    .collect();
                NbFeature::Gauss(GaussFeature { params })
            } else {
                let slots = prep.slots(f);
                let mut counts = vec![vec![0.0; slots]; n_classes];
                for (row, (&y, &w)) in rows.iter().zip(labels.iter().zip(&weights)) {
                    if let Rv::Cat(c) = row[f] {
                        counts[y][c] += w;
                    }
                }
                let log_probs = (0..n_classes)
                    .map(|c| {
                        let denom = class_weight[c] + slots as f64;
                        counts[c]
                            .iter()
                            .map(|&n| ((n + 1.0) / denom).ln())
                            .collect()
                    })
                    .collect();
                NbFeature::Cat(CatFeature { log_probs })
            }
        })
        .collect();

    NbModel {
        prep,
        features,
        priors,
        n_classes,
    }
}

impl NbModel {
    pub fn class_scores(&self, x: &Instance) -> Vec<f64> {
        let row = self.prep.resolve(x);
        let mut log_post = vec![f64::NEG_INFINITY; self.n_classes];
        for c in 0..self.n_classes {
            if self.priors[c] <= 0.0 {
                continue;
            }
            let mut lp = self.priors[c].ln();
            for (f, feat) in self.features.iter().enumerate() {
                match (feat, &row[f]) {
                    (NbFeature::Gauss(g), Rv::Num(x)) => {
                        let (m, v) = g.params[c];
                        lp += -0.5 * ((x - m) * (x - m) / v + v.ln() + (2.0 * std::f64::consts::PI).ln());
                    }
                    (NbFeature::Cat(t), Rv::Cat(slot)) => {
                        lp += t.log_probs[c][*slot];
                    }
                    _ => unreachable!("resolved values match their column kinds"),
                }
            }
            log_post[c] = lp;
        }

        let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut scores: Vec<f64> = log_post
            .iter()
            .map(|&lp| if lp.is_finite() { (lp - max).exp() } else { 0.0 })
            .collect();
        let total: f64 = scores.iter().sum();
        if total > 0.0 {
            for s in scores.iter_mut() {
                *s /= total;
            }
        } else {
            scores.clone_from(&self.priors);
        }
        scores
    }

    pub fn predict(&self, x: &Instance, priors: &[f64]) -> ClassId {
        pick_argmax(&self.class_scores(x), priors)
    }
}
