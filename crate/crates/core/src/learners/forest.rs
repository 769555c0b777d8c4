//! Random forest over the gain-ratio tree. Each tree draws a bootstrap
//! sample from the instance-weight distribution (multiplicities become
//! training weights), grows unpruned with a random feature subset per
//! node, and scoring sums the raw reached-leaf distributions across
//! trees before normalizing.

use super::common::{pick_argmax, weighted_priors, Preprocessor};
use super::tree::{descend, Node, TreeBuilder};
use crate::data::{ClassId, Dataset, Instance};
use crate::rng::{derive_seed, SplitMix64};

pub(crate) struct ForestModel {
    prep: Preprocessor,
    trees: Vec<Node>,
    priors: Vec<f64>,
    n_classes: usize,
}

pub(crate) fn fit(
    ds: &Dataset,
    weights: &[f64],
    n_trees: usize,
    features: Option<usize>,
    seed: u64,
) -> ForestModel {
    let prep = Preprocessor::fit(ds);
    let rows = prep.resolve_all(ds);
    let labels = ds.labels();
    let n = ds.len();
    let n_classes = ds.n_classes();
    let priors = weighted_priors(&labels, weights, n_classes);

    let subset = features
        .unwrap_or_else(|| (prep.n_features() as f64).sqrt().round() as usize)
        .clamp(1, prep.n_features());

    let total: f64 = weights.iter().sum();
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }

    let trees = (0..n_trees)
        .map(|t| {
            let mut rng = SplitMix64::new(derive_seed(seed, &["tree", &t.to_string()]));
            // Weighted bootstrap: multiplicity of each drawn index is the
            // instance's weight for this tree.
            let mut mult = vec![0.0; n];
            for _ in 0..n {
                let u = rng.next_f64() * total;
                let i = cumulative.partition_point(|&c| c <= u).min(n - 1);
                mult[i] += 1.0;
            }
            let idx: Vec<usize> = (0..n).filter(|&i| mult[i] > 0.0).collect();
            let mut builder = TreeBuilder {
                rows: &rows,
                labels: &labels,
                weights: &mult,
                n_classes,
                prep: &prep,
                min_leaf: 1.0,
                feature_subset: Some(subset),
                rng: Some(rng),
            };
            builder.grow(&idx)
        })
        .collect();

    ForestModel {
        prep,
        trees,
        priors,
        n_classes,
    }
}

impl ForestModel {
    /// Summed leaf distributions over all trees, normalized to a
    /// probability vector.
    pub fn class_scores(&self, x: &Instance) -> Vec<f64> {
        let row = self.prep.resolve(x);
        let mut sums = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (s, &w) in sums.iter_mut().zip(descend(tree, &row)) {
                *s += w;
            }
        }
        let total: f64 = sums.iter().sum();
        if total > 0.0 {
            sums.iter().map(|&s| s / total).collect()
        } else {
            self.priors.clone()
        }
    }

    pub fn predict(&self, x: &Instance, priors: &[f64]) -> ClassId {
        pick_argmax(&self.class_scores(x), priors)
    }
}
