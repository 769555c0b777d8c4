/*!
Label-noise identification and handling with diversity-selected
classifier ensembles.

Real-world training sets carry mislabeled instances. This crate estimates,
for every training instance, how consistent its recorded label is with the
concept the rest of the data supports: a set of base classifiers is trained
out-of-fold and the per-instance score is the fraction of them that
reproduce the recorded label. The classifiers are picked to disagree with
each other in the first place, by clustering the full registry on pairwise
classifier output difference and keeping one representative per cluster, so
the score is not dominated by several copies of the same inductive bias.

The scores drive three treatments, plus classical baselines to compare
against:

* filtering: drop instances whose score falls below a threshold;
* weighting: train on all instances, weighted by their scores;
* voting: classify directly with the diverse set as a plurality ensemble.

An experiment harness corrupts training labels at controlled rates, applies
any combination of treatments, and reports test accuracy, percent reduction
in error, Wilcoxon signed-rank comparisons, and win/tie/loss counts, all
reproducible bit-for-bit from a master seed.

Module map:

* [`data`]: dataset model, CSV and ARFF-style ingestion, shuffling,
  stratified splits, label corruption, bundled synthetic corpus.
* [`learners`]: seven from-scratch base classifiers, all trainable with
  per-instance weights, plus stratified cross-validation prediction.
* [`diversity`]: classifier output difference, agglomerative clustering of
  learners, dendrogram cuts, representative selection.
* [`noiseid`]: correctness scores and the filter/weight treatments,
  together with baseline filters (edited nearest neighbor, classification
  filter, ensemble filter, cross-validated committees, iterative
  partitioning).
* [`ensemble`]: plurality-vote ensembles, optionally with per-member
  biased weighting or filtering.
* [`eval`]: experiment harness, statistics, record and table output.
* [`rng`]: the single deterministic generator and seed derivation scheme
  used by everything above.
*/

pub mod data;
pub mod diversity;
pub mod ensemble;
pub mod eval;
pub mod learners;
mod mathx;
pub mod noiseid;
pub mod rng;

mod error;
pub use error::{Error, Result};
