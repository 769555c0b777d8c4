//! Single-hidden-layer perceptron trained by online backpropagation on
//! one-hot targets. Categorical inputs are one-hot encoded and numerics
//! min-max scaled by the preprocessor. Instance weights scale the
//! backpropagated output error, so a weight of zero silences an
//! instance without removing it from the pass order.

use super::common::{pick_argmax, weighted_priors, Preprocessor};
use crate::data::{ClassId, Dataset, Instance};
use crate::rng::{derive_seed, SplitMix64};

pub(crate) struct MlpModel {
    prep: Preprocessor,
    /// hidden x (inputs + 1), final column is the bias.
    w1: Vec<Vec<f64>>,
    /// outputs x (hidden + 1), final column is the bias.
    w2: Vec<Vec<f64>>,
    priors: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn forward(w1: &[Vec<f64>], w2: &[Vec<f64>], input: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let hidden: Vec<f64> = w1
        .iter()
        .map(|row| {
            let net: f64 = row[..input.len()]
                .iter()
                .zip(input)
                .map(|(w, x)| w * x)
                .sum::<f64>()
                + row[input.len()];
            sigmoid(net)
        })
        .collect();
    let output: Vec<f64> = w2
        .iter()
        .map(|row| {
            let net: f64 = row[..hidden.len()]
                .iter()
                .zip(&hidden)
                .map(|(w, h)| w * h)
                .sum::<f64>()
                + row[hidden.len()];
            sigmoid(net)
        })
        .collect();
    (hidden, output)
}

pub(crate) fn fit(
    ds: &Dataset,
    weights: &[f64],
    hidden: Option<usize>,
    epochs: usize,
    rate: f64,
    seed: u64,
) -> MlpModel {
    let prep = Preprocessor::fit(ds);
    let inputs = prep.encoded_width();
    let n_classes = ds.n_classes();
    let width = hidden.unwrap_or_else(|| (4usize).max((inputs + n_classes) / 2));
    let labels = ds.labels();
    let priors = weighted_priors(&labels, weights, n_classes);

    let resolved = prep.resolve_all(ds);
    let encoded: Vec<Vec<f64>> = resolved
        .iter()
        .map(|row| {
            let mut out = Vec::with_capacity(inputs);
            prep.encode_scaled(row, &mut out);
            out
        })
        .collect();

    let mut init = SplitMix64::new(derive_seed(seed, &["init"]));
    let mut layer = |rows: usize, cols: usize| -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| init.next_f64() - 0.5).collect())
            .collect()
    };
    let mut w1 = layer(width, inputs + 1);
    let mut w2 = layer(n_classes, width + 1);

    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut shuffler = SplitMix64::new(derive_seed(seed, &["order"]));

    for _ in 0..epochs {
        shuffler.shuffle(&mut order);
        for &i in &order {
            let input = &encoded[i];
            let (h, o) = forward(&w1, &w2, input);

            let delta_out: Vec<f64> = (0..n_classes)
                .map(|k| {
                    let t = if labels[i] == k { 1.0 } else { 0.0 };
                    weights[i] * (t - o[k]) * o[k] * (1.0 - o[k])
                })
                .collect();
            let delta_hidden: Vec<f64> = (0..width)
                .map(|j| {
                    let back: f64 = (0..n_classes).map(|k| delta_out[k] * w2[k][j]).sum();
                    h[j] * (1.0 - h[j]) * back
                })
                .collect();

            for (k, row) in w2.iter_mut().enumerate() {
                for (j, w) in row[..width].iter_mut().enumerate() {
                    *w += rate * delta_out[k] * h[j];
                }
                row[width] += rate * delta_out[k];
            }
            for (j, row) in w1.iter_mut().enumerate() {
                for (c, w) in row[..inputs].iter_mut().enumerate() {
                    *w += rate * delta_hidden[j] * input[c];
                }
                row[inputs] += rate * delta_hidden[j];
            }
        }
    }

    MlpModel { prep, w1, w2, priors }
}

impl MlpModel {
    /// Output activations normalized to sum 1.
    pub fn class_scores(&self, x: &Instance) -> Vec<f64> {
        let row = self.prep.resolve(x);
        let mut input = Vec::with_capacity(self.prep.encoded_width());
        self.prep.encode_scaled(&row, &mut input);
        let (_, o) = forward(&self.w1, &self.w2, &input);
        let total: f64 = o.iter().sum();
        if total > 0.0 {
            o.iter().map(|&v| v / total).collect()
        } else {
            self.priors.clone()
        }
    }

    pub fn predict(&self, x: &Instance, priors: &[f64]) -> ClassId {
        pick_argmax(&self.class_scores(x), priors)
    }
}
