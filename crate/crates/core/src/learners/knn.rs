//! k-nearest-neighbor classifier. Neighbors vote with their training
//! weights; an instance with weight zero is absent from the neighbor
//! pool entirely, so it can neither vote nor displace a real neighbor.

use super::common::{nearest_k, pick_argmax, weighted_priors, Preprocessor, Rv};
use crate::data::{ClassId, Dataset, Instance};

pub(crate) struct KnnModel {
    prep: Preprocessor,
    /// Kept rows in original training order (weight-zero rows dropped).
    rows: Vec<Vec<Rv>>,
    labels: Vec<ClassId>,
    weights: Vec<f64>,
    k: usize,
    n_classes: usize,
    priors: Vec<f64>,
}

pub(crate) fn fit(ds: &Dataset, weights: &[f64], k: usize) -> KnnModel {
    let kept: Vec<usize> = (0..ds.len()).filter(|&i| weights[i] > 0.0).collect();
    let sub = ds.subset(&kept);
    // Imputation and scaling statistics come from the kept instances
    // only; zero-weight rows must not leak into them.
    let prep = Preprocessor::fit(&sub);
    let rows = prep.resolve_all(&sub);
    let labels = sub.labels();
    let w: Vec<f64> = kept.iter().map(|&i| weights[i]).collect();
    let priors = weighted_priors(&labels, &w, ds.n_classes());
    KnnModel {
        prep,
        rows,
        labels,
        weights: w,
        k,
        n_classes: ds.n_classes(),
        priors,
    }
}

impl KnnModel {
    fn vote(&self, x: &Instance) -> Vec<f64> {
        let row = self.prep.resolve(x);
        // `orig` ascends, so sorting on the kept position breaks distance
        // ties toward the lower original training index.
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(pos, r)| (self.prep.heom(&row, r), pos))
            .collect();
        let neighbors = nearest_k(&mut dists, self.k);
        let mut votes = vec![0.0; self.n_classes];
        for &(_, pos) in neighbors {
            votes[self.labels[pos]] += self.weights[pos];
        }
        votes
    }

    pub fn predict(&self, x: &Instance, priors: &[f64]) -> ClassId {
        pick_argmax(&self.vote(x), priors)
    }

    /// Weighted share of the k neighbors agreeing with each class; with
    /// uniform weights this is the plain fraction of agreeing neighbors.
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

#[cfg(test)]
mod tests {
    use super::super::{train, LearnerSpec};
    use crate::data::{synth, Dataset, FeatureDescriptor, Instance, Value};

    fn point(x: f64, y: f64, label: usize) -> Instance {
        Instance {
            values: vec![Value::Num(x), Value::Num(y)],
            label,
        }
    }

    fn grid_ds(points: Vec<Instance>) -> Dataset {
        Dataset::new(
            "grid",
            vec![FeatureDescriptor::numeric("x"), FeatureDescriptor::numeric("y")],
            vec!["a".into(), "b".into()],
            points,
        )
        .unwrap()
    }

    #[test]
    fn score_is_fraction_of_agreeing_neighbors() {
        // Five training points, four of class a near the query.
        let ds = grid_ds(vec![
            point(0.0, 0.0, 0),
            point(0.1, 0.0, 0),
            point(0.0, 0.1, 0),
            point(0.1, 0.1, 0),
            point(1.0, 1.0, 1),
        ]);
        let model = train(&LearnerSpec::knn(5), &ds, None, 0).unwrap();
        let q = point(0.05, 0.05, 0);
        assert_eq!(model.classifier_score(&q, 0).unwrap(), 0.8);
        assert_eq!(model.classifier_score(&q, 1).unwrap(), 0.2);
        assert_eq!(model.predict(&q).unwrap(), 0);
    }

    #[test]
    fn zero_weight_instances_are_absent() {
        let ds = grid_ds(vec![
            point(0.0, 0.0, 0),
            point(1.0, 1.0, 1),
            point(0.05, 0.05, 1),
            point(0.95, 0.95, 0),
        ]);
        let masked = train(
            &LearnerSpec::knn(1),
            &ds,
            Some(&[1.0, 1.0, 0.0, 0.0]),
            0,
        )
        .unwrap();
        let plain = train(&LearnerSpec::knn(1), &ds.subset(&[0, 1]), None, 0).unwrap();
        for q in [point(0.1, 0.1, 0), point(0.9, 0.9, 1), point(0.4, 0.6, 0)] {
            assert_eq!(masked.predict(&q).unwrap(), plain.predict(&q).unwrap());
        }
    }

    #[test]
    fn distance_ties_prefer_lower_training_index() {
        // Two training points equidistant from the query, one per class.
        let ds = grid_ds(vec![point(-1.0, 0.0, 1), point(1.0, 0.0, 0)]);
        let model = train(&LearnerSpec::knn(1), &ds, None, 0).unwrap();
        // Index 0 wins the neighbor slot, so its class (b=1) wins.
        assert_eq!(model.predict(&point(0.0, 0.0, 0)).unwrap(), 1);
    }

    #[test]
    fn k_larger_than_dataset_uses_everyone() {
        let ds = grid_ds(vec![point(0.0, 0.0, 0), point(1.0, 1.0, 1), point(2.0, 2.0, 1)]);
        let model = train(&LearnerSpec::knn(50), &ds, None, 0).unwrap();
        // All three vote regardless of position: b has 2 votes.
        assert_eq!(model.predict(&point(0.0, 0.0, 0)).unwrap(), 1);
    }

    #[test]
    fn separates_blobs() {
        let ds = synth::two_blobs(100, 5);
        let model = train(&LearnerSpec::knn(5), &ds, None, 0).unwrap();
        let acc = ds
            .instances()
            .iter()
            .filter(|i| model.predict(i).unwrap() == i.label)
            .count() as f64
            / 100.0;
        assert!(acc > 0.97, "{acc}");
    }
}
