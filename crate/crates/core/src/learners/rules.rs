//! Sequential-covering rule induction in the RIPPER mold. Classes are
//! handled rarest first; the most frequent class writes no rules and
//! acts as the default. Each rule greedily grows conditions by FOIL
//! gain on a 2/3 grow split, then drops trailing conditions to maximize
//! (p - n) / (p + n) on the held-out third. A rule is kept when its
//! pruning accuracy reaches one half and its positive coverage meets
//! the configured floor; covered instances leave the working set.
//!
//! Scoring follows coverage semantics rather than probability calibration:
//! the score of class y for an instance is the share of the full
//! training weight matched by the instance's first-firing rule that
//! belongs to y, so the scores of one rule sum to 1 but predict() may
//! disagree with the score argmax when pruning admits negatives.

use super::common::{normalize_mean_one, pick_argmax, weighted_priors, Preprocessor, Rv};
use crate::data::{ClassId, Dataset, Instance};
use crate::rng::{derive_seed, SplitMix64};

const MAX_CONDS: usize = 16;
const MAX_THRESHOLDS: usize = 32;
const MIN_GAIN: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq)]
enum Cond {
    NumLe { feature: usize, threshold: f64 },
    NumGt { feature: usize, threshold: f64 },
    CatEq { feature: usize, slot: usize },
}

impl Cond {
    fn matches(&self, row: &[Rv]) -> bool {
        match *self {
            Cond::NumLe { feature, threshold } => match row[feature] {
                Rv::Num(x) => x <= threshold,
                Rv::Cat(_) => false,
            },
            Cond::NumGt { feature, threshold } => match row[feature] {
                Rv::Num(x) => x > threshold,
                Rv::Cat(_) => false,
            },
            Cond::CatEq { feature, slot } => match row[feature] {
                Rv::Cat(s) => s == slot,
                Rv::Num(_) => false,
            },
        }
    }
}

struct Rule {
    conds: Vec<Cond>,
    class: ClassId,
    /// Weighted class counts of all training instances matching the
    /// conditions, used for coverage-share scores.
    dist: Vec<f64>,
}

impl Rule {
    fn covers(&self, row: &[Rv]) -> bool {
        self.conds.iter().all(|c| c.matches(row))
    }
}

pub(crate) struct RuleModel {
    prep: Preprocessor,
    rules: Vec<Rule>,
    default_class: ClassId,
    default_dist: Vec<f64>,
    priors: Vec<f64>,
}

fn covered_by(conds: &[Cond], rows: &[Vec<Rv>], idx: &[usize]) -> Vec<usize> {
    idx.iter()
        .copied()
        .filter(|&i| conds.iter().all(|c| c.matches(&rows[i])))
        .collect()
}

fn pos_neg(idx: &[usize], labels: &[ClassId], weights: &[f64], class: ClassId) -> (f64, f64) {
    let mut p = 0.0;
    let mut n = 0.0;
    for &i in idx {
        if labels[i] == class {
            p += weights[i];
        } else {
            n += weights[i];
        }
    }
    (p, n)
}

/// Candidate conditions over the instances a growing rule still covers.
/// Numeric features contribute both directions of each value midpoint
/// (thinned to a fixed cap), categorical features one equality per
/// occupied slot.
fn candidates(prep: &Preprocessor, rows: &[Vec<Rv>], idx: &[usize]) -> Vec<Cond> {
    let mut out = Vec::new();
    for f in 0..prep.n_features() {
        if prep.is_numeric(f) {
            let mut vals: Vec<f64> = idx
                .iter()
                .map(|&i| match rows[i][f] {
                    Rv::Num(x) => x,
                    Rv::Cat(_) => unreachable!(),
                })
                .collect();
            vals.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
            vals.dedup();
            let mut mids: Vec<f64> = vals.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
            if mids.len() > MAX_THRESHOLDS {
                let full = std::mem::take(&mut mids);
                for i in 0..MAX_THRESHOLDS {
                    mids.push(full[i * full.len() / MAX_THRESHOLDS]);
                }
                mids.dedup();
            }
            for t in mids {
                out.push(Cond::NumLe { feature: f, threshold: t });
                out.push(Cond::NumGt { feature: f, threshold: t });
            }
        } else {
            let mut seen = vec![false; prep.slots(f)];
            for &i in idx {
                if let Rv::Cat(s) = rows[i][f] {
                    seen[s] = true;
                }
            }
            for (slot, present) in seen.iter().enumerate() {
                if *present {
                    out.push(Cond::CatEq { feature: f, slot });
                }
            }
        }
    }
    out
}

/// Greedy growth by FOIL gain until no negatives remain covered or no
/// candidate improves. Gain ties keep the earliest candidate, which
/// fixes the order: lower feature, then lower threshold, Le before Gt.
fn grow_rule(
    prep: &Preprocessor,
    rows: &[Vec<Rv>],
    labels: &[ClassId],
    weights: &[f64],
    grow_idx: &[usize],
    class: ClassId,
) -> Vec<Cond> {
    let mut conds: Vec<Cond> = Vec::new();
    let mut covered: Vec<usize> = grow_idx.to_vec();
    let (mut p0, mut n0) = pos_neg(&covered, labels, weights, class);

    while n0 > 0.0 && conds.len() < MAX_CONDS {
        let base = if p0 > 0.0 {
            (p0 / (p0 + n0)).log2()
        } else {
            break;
        };
        let mut best: Option<(f64, Cond, Vec<usize>)> = None;
        for cond in candidates(prep, rows, &covered) {
            if conds.contains(&cond) {
                continue;
            }
            let kept: Vec<usize> = covered
                .iter()
                .copied()
                .filter(|&i| cond.matches(&rows[i]))
                .collect();
            let (p1, n1) = pos_neg(&kept, labels, weights, class);
            if p1 <= 0.0 {
                continue;
            }
            let gain = p1 * ((p1 / (p1 + n1)).log2() - base);
            if gain > MIN_GAIN && best.as_ref().map_or(true, |(g, _, _)| gain > *g) {
                best = Some((gain, cond, kept));
            }
        }
        let Some((_, cond, kept)) = best else { break };
        conds.push(cond);
        covered = kept;
        let (p, n) = pos_neg(&covered, labels, weights, class);
        p0 = p;
        n0 = n;
    }
    conds
}

/// Drops trailing conditions, keeping the shortest prefix that
/// maximizes (p - n) / (p + n) on the pruning split.
fn prune_rule(
    conds: Vec<Cond>,
    rows: &[Vec<Rv>],
    labels: &[ClassId],
    weights: &[f64],
    prune_idx: &[usize],
    class: ClassId,
) -> Vec<Cond> {
    if prune_idx.is_empty() || conds.is_empty() {
        return conds;
    }
    let mut best_len = conds.len();
    let mut best_value = f64::NEG_INFINITY;
    for len in 1..=conds.len() {
        let kept = covered_by(&conds[..len], rows, prune_idx);
        let (p, n) = pos_neg(&kept, labels, weights, class);
        let value = if p + n > 0.0 { (p - n) / (p + n) } else { -1.0 };
        // Strict > keeps the shortest prefix among ties.
        if value > best_value {
            best_value = value;
            best_len = len;
        }
    }
    let mut conds = conds;
    conds.truncate(best_len);
    conds
}

pub(crate) fn fit(
    ds: &Dataset,
    raw_weights: &[f64],
    max_rules: usize,
    min_coverage: f64,
    seed: u64,
) -> RuleModel {
    let weights = normalize_mean_one(raw_weights);
    let prep = Preprocessor::fit(ds);
    let rows = prep.resolve_all(ds);
    let labels = ds.labels();
    let n_classes = ds.n_classes();
    let priors = weighted_priors(&labels, &weights, n_classes);

    // Rarest class first; the heaviest stays rule-free as the default.
    let mut class_weight = vec![0.0; n_classes];
    for (i, &y) in labels.iter().enumerate() {
        class_weight[y] += weights[i];
    }
    let mut order: Vec<ClassId> = (0..n_classes).collect();
    order.sort_by(|&a, &b| {
        class_weight[a]
            .partial_cmp(&class_weight[b])
            .expect("finite")
            .then(a.cmp(&b))
    });
    let default_class = *order.last().expect("validated non-empty class set");

    let mut rng = SplitMix64::new(derive_seed(seed, &["cover"]));
    let mut working: Vec<usize> = (0..ds.len()).collect();
    let mut rules: Vec<Rule> = Vec::new();

    for &class in order.iter().take(n_classes.saturating_sub(1)) {
        let mut made = 0;
        loop {
            if made >= max_rules {
                break;
            }
            let (pos_w, _) = pos_neg(&working, &labels, &weights, class);
            if pos_w <= 0.0 {
                break;
            }

            let mut shuffled = working.clone();
            rng.shuffle(&mut shuffled);
            let cut = (shuffled.len() * 2) / 3;
            let (grow_idx, prune_idx) = if cut == 0 || cut == shuffled.len() {
                (shuffled.as_slice(), &[][..])
            } else {
                shuffled.split_at(cut)
            };

            let grown = grow_rule(&prep, &rows, &labels, &weights, grow_idx, class);
            if grown.is_empty() {
                break;
            }
            let conds = prune_rule(grown, &rows, &labels, &weights, prune_idx, class);

            // Judge on the pruning split when it exists, else the grow split.
            let judge = if prune_idx.is_empty() { grow_idx } else { prune_idx };
            let judged = covered_by(&conds, &rows, judge);
            let (jp, jn) = pos_neg(&judged, &labels, &weights, class);
            let accurate = jp + jn <= 0.0 || jp / (jp + jn) >= 0.5;
            let covered_working = covered_by(&conds, &rows, &working);
            let (cov_p, _) = pos_neg(&covered_working, &labels, &weights, class);
            if !accurate || cov_p < min_coverage {
                break;
            }

            working.retain(|i| !covered_working.contains(i));
            rules.push(Rule {
                conds,
                class,
                dist: Vec::new(),
            });
            made += 1;
        }
    }

    // Coverage-share distributions over the full training set.
    for rule in &mut rules {
        let mut dist = vec![0.0; n_classes];
        for (i, row) in rows.iter().enumerate() {
            if rule.covers(row) {
                dist[labels[i]] += weights[i];
            }
        }
        if dist.iter().sum::<f64>() <= 0.0 {
            dist[rule.class] = 1.0;
        }
        rule.dist = dist;
    }
    let mut default_dist = vec![0.0; n_classes];
    for (i, row) in rows.iter().enumerate() {
        if !rules.iter().any(|r| r.covers(row)) {
            default_dist[labels[i]] += weights[i];
        }
    }
    if default_dist.iter().sum::<f64>() <= 0.0 {
        default_dist[default_class] = 1.0;
    }

    RuleModel {
        prep,
        rules,
        default_class,
        default_dist,
        priors,
    }
}

impl RuleModel {
    fn firing_dist(&self, x: &Instance) -> &[f64] {
        let row = self.prep.resolve(x);
        for rule in &self.rules {
            if rule.covers(&row) {
                return &rule.dist;
            }
        }
        &self.default_dist
    }

    /// Share of the first firing rule's covered training weight holding
    /// each class; the default region's share when nothing fires.
    pub fn class_scores(&self, x: &Instance) -> Vec<f64> {
        let dist = self.firing_dist(x);
        let total: f64 = dist.iter().sum();
        if total > 0.0 {
            dist.iter().map(|&w| w / total).collect()
        } else {
            self.priors.clone()
        }
    }

    pub fn predict(&self, x: &Instance) -> ClassId {
        let row = self.prep.resolve(x);
        for rule in &self.rules {
            if rule.covers(&row) {
                return rule.class;
            }
        }
        let total: f64 = self.default_dist.iter().sum();
        if total > 0.0 {
            let scores: Vec<f64> = self.default_dist.iter().map(|&w| w / total).collect();
            pick_argmax(&scores, &self.priors)
        } else {
            self.default_class
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{train, LearnerSpec};
    use crate::data::{synth, Dataset, FeatureDescriptor, Instance, Value};

    fn num_inst(x: f64, label: usize) -> Instance {
        Instance {
            values: vec![Value::Num(x)],
            label,
        }
    }

    fn threshold_set() -> Dataset {
        // Class b above 2, class a below, b rarer so rules target b.
        let mut insts: Vec<Instance> = (0..12).map(|i| num_inst(i as f64 * 0.2, 0)).collect();
        insts.extend((0..6).map(|i| num_inst(2.5 + i as f64 * 0.2, 1)));
        Dataset::new(
            "t",
            vec![FeatureDescriptor::numeric("x")],
            vec!["a".into(), "b".into()],
            insts,
        )
        .unwrap()
    }

    #[test]
    fn learns_a_single_threshold_concept() {
        let ds = threshold_set();
        let model = train(&LearnerSpec::rule_learner(), &ds, None, 0).unwrap();
        for inst in ds.instances() {
            assert_eq!(model.predict(inst).unwrap(), inst.label);
        }
        // Clean separation: the firing rule covers only class b, so the
        // coverage share is exactly 1.
        let q = num_inst(3.0, 1);
        assert_eq!(model.classifier_score(&q, 1).unwrap(), 1.0);
        assert_eq!(model.classifier_score(&q, 0).unwrap(), 0.0);
    }

    #[test]
    fn uncoverable_minimum_leaves_only_the_default() {
        // No rule can cover weight 1000, so the majority class answers
        // everything.
        let ds = threshold_set();
        let spec = LearnerSpec::RuleLearner {
            max_rules: 8,
            min_coverage: 1000.0,
        };
        let model = train(&spec, &ds, None, 0).unwrap();
        for inst in ds.instances() {
            assert_eq!(model.predict(inst).unwrap(), 0);
        }
    }

    #[test]
    fn zero_weight_class_grows_no_rules() {
        let ds = threshold_set();
        let weights: Vec<f64> = ds
            .instances()
            .iter()
            .map(|i| if i.label == 1 { 0.0 } else { 1.0 })
            .collect();
        let model = train(&LearnerSpec::rule_learner(), &ds, Some(&weights), 0).unwrap();
        for inst in ds.instances() {
            assert_eq!(model.predict(inst).unwrap(), 0);
        }
    }

    #[test]
    fn handles_categorical_concepts() {
        let ds = synth::shades(240, 7);
        let model = train(&LearnerSpec::rule_learner(), &ds, None, 1).unwrap();
        let acc = ds
            .instances()
            .iter()
            .filter(|i| model.predict(i).unwrap() == i.label)
            .count() as f64
            / 240.0;
        assert!(acc > 0.65, "{acc}");
    }

    #[test]
    fn scores_sum_to_one_for_any_query() {
        let ds = synth::medley(120, 3);
        let model = train(&LearnerSpec::rule_learner(), &ds, None, 2).unwrap();
        for inst in ds.instances() {
            let total: f64 = (0..3)
                .map(|y| model.classifier_score(inst, y).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "{total}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let ds = synth::medley(120, 3);
        let a = train(&LearnerSpec::rule_learner(), &ds, None, 5).unwrap();
        let b = train(&LearnerSpec::rule_learner(), &ds, None, 5).unwrap();
        for inst in ds.instances() {
            assert_eq!(a.predict(inst).unwrap(), b.predict(inst).unwrap());
            assert_eq!(a.class_scores(inst).unwrap(), b.class_scores(inst).unwrap());
        }
    }
}
