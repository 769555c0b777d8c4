//! Locally weighted vote: the k nearest training instances vote with a
//! Gaussian kernel exp(-(d/h)^2) times their training weight, where the
//! bandwidth h is the distance of the k-th neighbor. Close neighbors
//! dominate instead of all k counting equally, and a larger default
//! neighborhood than knn's gives it a visibly different bias.

use super::common::{nearest_k, pick_argmax, weighted_priors, Preprocessor, Rv};
use crate::data::{ClassId, Dataset, Instance};

pub(crate) struct LwlModel {
    prep: Preprocessor,
    rows: Vec<Vec<Rv>>,
    labels: Vec<ClassId>,
    weights: Vec<f64>,
    k: usize,
    n_classes: usize,
    priors: Vec<f64>,
}

pub(crate) fn fit(ds: &Dataset, weights: &[f64], k: usize) -> LwlModel {
    let kept: Vec<usize> = (0..ds.len()).filter(|&i| weights[i] > 0.0).collect();
    let sub = ds.subset(&kept);
    let prep = Preprocessor::fit(&sub);
    let rows = prep.resolve_all(&sub);
    let labels = sub.labels();
    let w: Vec<f64> = kept.iter().map(|&i| weights[i]).collect();
    let priors = weighted_priors(&labels, &w, ds.n_classes());
    LwlModel {
        prep,
        rows,
        labels,
        weights: w,
        k,
        n_classes: ds.n_classes(),
        priors,
    }
}

impl LwlModel {
    fn vote(&self, x: &Instance) -> Vec<f64> {
        let row = self.prep.resolve(x);
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(pos, r)| (self.prep.heom(&row, r), pos))
            .collect();
        let neighbors = nearest_k(&mut dists, self.k);
        // The k-th neighbor sets the bandwidth; a zero bandwidth means
        // every neighbor coincides with the query and votes flat.
        let bandwidth = neighbors.last().map_or(0.0, |&(d, _)| d);
        let mut votes = vec![0.0; self.n_classes];
        for &(d, pos) in neighbors {
            let kernel = if bandwidth > 0.0 {
                (-(d / bandwidth).powi(2)).exp()
            } else {
                1.0
            };
            votes[self.labels[pos]] += self.weights[pos] * kernel;
        }
        votes
    }

    pub fn predict(&self, x: &Instance, priors: &[f64]) -> ClassId {
        pick_argmax(&self.vote(x), priors)
    }

    pub fn class_scores(&self, x: &Instance) -> Vec<f64> {
        let mut votes = self.vote(x);
        let total: f64 = votes.iter().sum();
        if total > 0.0 {
            for v in votes.iter_mut() {
                *v /= total;
            }
        } else {
            votes.clone_from(&self.priors);
        }
        votes
    }
}
