//! Gain-ratio decision tree. Numeric features split binarily at value
//! midpoints, categorical features split multiway on their slots, and
//! instance counts are weight sums throughout. Pruning is
//! pessimistic-error: a subtree collapses when the Wilson upper bound of
//! its error as a single leaf is no worse than the summed bounds of its
//! children. The growing machinery is shared with the random forest,
//! which disables pruning and samples a feature subset per node.

use super::common::{normalize_mean_one, pick_argmax, weighted_priors, Preprocessor, Rv};
use crate::data::{ClassId, Dataset, Instance};
use crate::mathx::inverse_normal_cdf;
use crate::rng::SplitMix64;

const MAX_DEPTH: usize = 60;
const MIN_GAIN: f64 = 1e-12;

pub(super) struct Node {
    /// Weighted class counts of the training instances reaching this node.
    pub dist: Vec<f64>,
    pub kind: NodeKind,
}

pub(super) enum NodeKind {
    Leaf,
    NumSplit {
        feature: usize,
        threshold: f64,
        below: Box<Node>,
        above: Box<Node>,
    },
    CatSplit {
        feature: usize,
        /// Indexed by category slot; `None` where no training weight
        /// landed, in which case routing stops at this node's dist.
        children: Vec<Option<Box<Node>>>,
    },
}

/// Follows a resolved row to the deepest node that can route it and
/// returns that node's class distribution.
pub(super) fn descend<'a>(node: &'a Node, row: &[Rv]) -> &'a [f64] {
    match &node.kind {
        NodeKind::Leaf => &node.dist,
        NodeKind::NumSplit {
            feature,
            threshold,
            below,
            above,
        } => match row[*feature] {
            Rv::Num(x) => {
                if x <= *threshold {
                    descend(below, row)
                } else {
                    descend(above, row)
                }
            }
            Rv::Cat(_) => unreachable!("schema-checked"),
        },
        NodeKind::CatSplit { feature, children } => match row[*feature] {
            Rv::Cat(slot) => match children.get(slot).and_then(|c| c.as_ref()) {
                Some(child) => descend(child, row),
                None => &node.dist,
            },
            Rv::Num(_) => unreachable!("schema-checked"),
        },
    }
}

#[cfg(test)]
fn count_leaves(node: &Node) -> usize {
    match &node.kind {
        NodeKind::Leaf => 1,
        NodeKind::NumSplit { below, above, .. } => count_leaves(below) + count_leaves(above),
        NodeKind::CatSplit { children, .. } => children
            .iter()
            .flatten()
            .map(|c| count_leaves(c))
            .sum::<usize>()
            .max(1),
    }
}

pub(super) struct TreeBuilder<'a> {
    pub rows: &'a [Vec<Rv>],
    pub labels: &'a [ClassId],
    pub weights: &'a [f64],
    pub n_classes: usize,
    pub prep: &'a Preprocessor,
    pub min_leaf: f64,
    /// Features examined per node; `None` means all of them.
    pub feature_subset: Option<usize>,
    pub rng: Option<SplitMix64>,
}

struct Candidate {
    ratio: f64,
    feature: usize,
    split: SplitChoice,
}

enum SplitChoice {
    Num { threshold: f64 },
    Cat,
}

impl<'a> TreeBuilder<'a> {
    pub fn grow(&mut self, idx: &[usize]) -> Node {
        self.grow_node(idx, 0)
    }

    fn class_dist(&self, idx: &[usize]) -> Vec<f64> {
        let mut dist = vec![0.0; self.n_classes];
        for &i in idx {
            dist[self.labels[i]] += self.weights[i];
        }
        dist
    }

    fn grow_node(&mut self, idx: &[usize], depth: usize) -> Node {
        let dist = self.class_dist(idx);
        let total: f64 = dist.iter().sum();
        let pure = dist.iter().filter(|&&w| w > 0.0).count() <= 1;
        if pure || depth >= MAX_DEPTH || total < 2.0 * self.min_leaf {
            return Node {
                dist,
                kind: NodeKind::Leaf,
            };
        }

        let features: Vec<usize> = match self.feature_subset {
            None => (0..self.prep.n_features()).collect(),
            Some(m) => {
                let rng = self.rng.as_mut().expect("subset sampling needs a generator");
                let mut picked = rng.sample_indices(self.prep.n_features(), m.min(self.prep.n_features()));
                // Sorted so ratio ties keep breaking toward the lower
                // feature index regardless of draw order.
                picked.sort_unstable();
                picked
            }
        };

        let mut best: Option<Candidate> = None;
        for &f in &features {
            let cand = if self.prep.is_numeric(f) {
                self.best_numeric_split(idx, f, &dist, total)
            } else {
                self.categorical_split(idx, f, &dist, total)
            };
            if let Some(c) = cand {
                let better = match &best {
                    None => true,
                    Some(b) => c.ratio > b.ratio,
                };
                if better {
                    best = Some(c);
                }
            }
        }

        let Some(candidate) = best else {
            return Node {
                dist,
                kind: NodeKind::Leaf,
            };
        };

        match candidate.split {
            SplitChoice::Num { threshold } => {
                let f = candidate.feature;
                let (lo, hi): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| match self.rows[i][f] {
                    Rv::Num(x) => x <= threshold,
                    Rv::Cat(_) => unreachable!(),
                });
                let below = Box::new(self.grow_node(&lo, depth + 1));
                let above = Box::new(self.grow_node(&hi, depth + 1));
                Node {
                    dist,
                    kind: NodeKind::NumSplit {
                        feature: f,
                        threshold,
                        below,
                        above,
                    },
                }
            }
            SplitChoice::Cat => {
                let f = candidate.feature;
                let slots = self.prep.slots(f);
                let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); slots];
                for &i in idx {
                    if let Rv::Cat(slot) = self.rows[i][f] {
                        buckets[slot].push(i);
                    }
                }
                let children = buckets
                    .iter()
                    .map(|bucket| {
                        if bucket.is_empty() {
                            None
                        } else {
                            Some(Box::new(self.grow_node(bucket, depth + 1)))
                        }
                    })
                    .collect();
                Node {
                    dist,
                    kind: NodeKind::CatSplit {
                        feature: f,
                        children,
                    },
                }
            }
        }
    }

    /// Best threshold for one numeric feature by gain ratio, scanning
    /// boundaries between distinct sorted values. Ties keep the lowest
    /// threshold.
    fn best_numeric_split(
        &self,
        idx: &[usize],
        f: usize,
        dist: &[f64],
        total: f64,
    ) -> Option<Candidate> {
        let mut vals: Vec<(f64, ClassId, f64)> = idx
            .iter()
            .map(|&i| match self.rows[i][f] {
                Rv::Num(x) => (x, self.labels[i], self.weights[i]),
                Rv::Cat(_) => unreachable!(),
            })
            .collect();
        vals.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));

        let node_h = entropy(dist, total);
        let mut left = vec![0.0; self.n_classes];
        let mut left_w = 0.0;
        let mut best: Option<(f64, f64)> = None; // (ratio, threshold)

        for w in 0..vals.len() - 1 {
            let (x, y, wt) = vals[w];
            left[y] += wt;
            left_w += wt;
            let next_x = vals[w + 1].0;
            if next_x <= x {
                continue;
            }
            let right_w = total - left_w;
            if left_w < self.min_leaf || right_w < self.min_leaf {
                continue;
            }
            let mut right = dist.to_vec();
            for (r, l) in right.iter_mut().zip(&left) {
                *r -= l;
            }
            let gain = node_h
                - (left_w / total) * entropy(&left, left_w)
                - (right_w / total) * entropy(&right, right_w);
            if gain <= MIN_GAIN {
                continue;
            }
            let si = split_info(&[left_w, right_w], total);
            if si <= MIN_GAIN {
                continue;
            }
            let ratio = gain / si;
            if best.map_or(true, |(r, _)| ratio > r) {
                best = Some((ratio, (x + next_x) / 2.0));
            }
        }

        best.map(|(ratio, threshold)| Candidate {
            ratio,
            feature: f,
            split: SplitChoice::Num { threshold },
        })
    }

    /// Multiway categorical split, one branch per occupied slot. Requires
    /// at least two branches carrying `min_leaf` weight.
    fn categorical_split(
        &self,
        idx: &[usize],
        f: usize,
        dist: &[f64],
        total: f64,
    ) -> Option<Candidate> {
        let slots = self.prep.slots(f);
        let mut branch = vec![vec![0.0; self.n_classes]; slots];
        for &i in idx {
            if let Rv::Cat(slot) = self.rows[i][f] {
                branch[slot][self.labels[i]] += self.weights[i];
            }
        }
        let branch_w: Vec<f64> = branch.iter().map(|b| b.iter().sum()).collect();
        let viable = branch_w.iter().filter(|&&w| w >= self.min_leaf).count();
        if viable < 2 {
            return None;
        }

        let node_h = entropy(dist, total);
        let mut children_h = 0.0;
        for (b, &w) in branch.iter().zip(&branch_w) {
            if w > 0.0 {
                children_h += (w / total) * entropy(b, w);
            }
        }
        let gain = node_h - children_h;
        if gain <= MIN_GAIN {
            return None;
        }
        let occupied: Vec<f64> = branch_w.iter().cloned().filter(|&w| w > 0.0).collect();
        let si = split_info(&occupied, total);
        if si <= MIN_GAIN {
            return None;
        }
        Some(Candidate {
            ratio: gain / si,
            feature: f,
            split: SplitChoice::Cat,
        })
    }
}

fn entropy(dist: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    dist.iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.ln()
        })
        .sum()
}

fn split_info(parts: &[f64], total: f64) -> f64 {
    entropy(parts, total)
}

/// Wilson upper confidence bound on the error count of a node treated as
/// a leaf: n * U_z(e/n), the pessimistic error estimate.
fn pessimistic_errors(dist: &[f64], z: f64) -> f64 {
    let n: f64 = dist.iter().sum();
    if n <= 0.0 {
        return 0.0;
    }
    let e = n - dist.iter().cloned().fold(0.0, f64::max);
    let f = e / n;
    let z2 = z * z;
    let upper = (f + z2 / (2.0 * n) + z * (f * (1.0 - f) / n + z2 / (4.0 * n * n)).sqrt())
        / (1.0 + z2 / n);
    n * upper
}

/// Bottom-up pessimistic-error pruning; returns the subtree's estimate.
pub(super) fn prune(node: &mut Node, z: f64) -> f64 {
    let sub_estimate = match &mut node.kind {
        NodeKind::Leaf => return pessimistic_errors(&node.dist, z),
        NodeKind::NumSplit { below, above, .. } => prune(below, z) + prune(above, z),
        NodeKind::CatSplit { children, .. } => children
            .iter_mut()
            .flatten()
            .map(|c| prune(c, z))
            .sum(),
    };
    let as_leaf = pessimistic_errors(&node.dist, z);
    if as_leaf <= sub_estimate {
        node.kind = NodeKind::Leaf;
        as_leaf
    } else {
        sub_estimate
    }
}

pub(crate) struct TreeModel {
    prep: Preprocessor,
    root: Node,
    priors: Vec<f64>,
}

pub(crate) fn fit(ds: &Dataset, raw_weights: &[f64], confidence: f64, min_leaf: f64) -> TreeModel {
    let weights = normalize_mean_one(raw_weights);
    let prep = Preprocessor::fit(ds);
    let rows = prep.resolve_all(ds);
    let labels = ds.labels();
    let priors = weighted_priors(&labels, &weights, ds.n_classes());
    let idx: Vec<usize> = (0..ds.len()).collect();
    let mut builder = TreeBuilder {
        rows: &rows,
        labels: &labels,
        weights: &weights,
        n_classes: ds.n_classes(),
        prep: &prep,
        min_leaf,
        feature_subset: None,
        rng: None,
    };
    let mut root = builder.grow(&idx);
    let z = inverse_normal_cdf(1.0 - confidence);
    prune(&mut root, z);
    TreeModel { prep, root, priors }
}

impl TreeModel {
    /// Share of the reached leaf's weight belonging to each class.
    pub fn class_scores(&self, x: &Instance) -> Vec<f64> {
        let row = self.prep.resolve(x);
        let dist = descend(&self.root, &row);
        let total: f64 = dist.iter().sum();
        if total > 0.0 {
            dist.iter().map(|&w| w / total).collect()
        } else {
            self.priors.clone()
        }
    }

    pub fn predict(&self, x: &Instance, priors: &[f64]) -> ClassId {
        pick_argmax(&self.class_scores(x), priors)
    }
}
