//! Statistics behind the experiment tables: plain accuracy, percent
//! reduction in error, the Wilcoxon signed-rank test, and win/tie/loss
//! counts.

use crate::mathx::normal_cdf;
use crate::{Error, Result};

pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Argument("empty prediction set".into()));
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Share of the baseline's error that a treatment removed, on percent
/// scale accuracies: (noise - orig) / (100 - orig). Positive means the
/// treatment helped; a perfect baseline leaves the ratio undefined.
pub fn percent_reduction_in_error(noise_acc: f64, orig_acc: f64) -> Option<f64> {
    if orig_acc >= 100.0 {
        return None;
    }
    Some((noise_acc - orig_acc) / (100.0 - orig_acc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The first sample ranks higher.
    Greater,
    /// The second sample ranks higher.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WilcoxonMode {
    /// Exact below [`EXACT_LIMIT`] pairs, normal approximation beyond.
    #[default]
    Auto,
    Exact,
    Normal,
}

/// Pair count at which Auto switches from the exact distribution to the
/// normal approximation.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonOutcome {
    /// min(W+, W-) over the signed ranks.
    pub statistic: f64,
    /// One-sided tail probability for the observed direction.
    pub p: f64,
    pub direction: Option<Direction>,
    /// Pairs surviving the zero-difference drop.
    pub n: usize,
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonOutcome> {
    wilcoxon_signed_rank_mode(a, b, WilcoxonMode::Auto)
}

/// Signed-rank test with the conventions spelled out: zero differences
/// are dropped, tied absolute differences share their average rank, the
/// statistic is the smaller rank sum, and the p-value is one-sided in
/// the observed direction. The exact mode counts sign assignments by
/// dynamic programming over doubled (integer) ranks; the normal mode
/// applies a continuity correction and the tie-adjusted variance.
pub fn wilcoxon_signed_rank_mode(
    a: &[f64],
    b: &[f64],
    mode: WilcoxonMode,
) -> Result<WilcoxonOutcome> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonOutcome {
            statistic: 0.0,
            p: 1.0,
            direction: None,
            n: 0,
        });
    }

    // Rank |d| ascending, averaging ranks across exact ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().partial_cmp(&diffs[j].abs()).expect("finite"));
    let mut ranks = vec![0.0; n];
    let mut tie_groups: Vec<usize> = Vec::new();
    let mut at = 0;
    while at < n {
        let mut end = at + 1;
        while end < n && diffs[order[end]].abs() == diffs[order[at]].abs() {
            end += 1;
        }
        // Positions at..end (0-based) hold ranks at+1 ..= end.
        let avg = (at + 1 + end) as f64 / 2.0;
        for &i in &order[at..end] {
            ranks[i] = avg;
        }
        tie_groups.push(end - at);
        at = end;
    }

    let w_plus: f64 = (0..n).filter(|&i| diffs[i] > 0.0).map(|i| ranks[i]).sum();
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);
    let direction = if w_plus > w_minus {
        Some(Direction::Greater)
    } else if w_plus < w_minus {
        Some(Direction::Less)
    } else {
        None
    };

    let exact = match mode {
        WilcoxonMode::Exact => true,
        WilcoxonMode::Normal => false,
        WilcoxonMode::Auto => n < EXACT_LIMIT,
    };
    let p = if exact {
        exact_tail(&ranks, statistic)
    } else {
        normal_tail(n, &tie_groups, statistic)
    };
    Ok(WilcoxonOutcome {
        statistic,
        p: p.min(1.0),
        direction,
        n,
    })
}

/// P(S <= w) where S is the rank sum of a uniformly random sign
/// assignment. Average ranks are multiples of one half, so doubling
/// them gives integers and the distribution is a subset-sum count.
fn exact_tail(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let target = (2.0 * w).round() as usize;
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        reach += r;
        for s in (r..=reach).rev() {
            counts[s] += counts[s - r];
        }
    }
    let below: f64 = counts[..=target.min(total)].iter().sum();
    below / 2.0f64.powi(ranks.len() as i32)
}

fn normal_tail(n: usize, tie_groups: &[usize], w: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_adjust: f64 = tie_groups
        .iter()
        .map(|&t| {
            let t = t as f64;
            (t * t * t - t) / 48.0
        })
        .sum();
    // Even with every difference tied in one group the adjustment stays
    // below the main term (var >= n(n+1)^2/16), so var is positive.
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_adjust;
    let z = (w + 0.5 - mean) / var.sqrt();
    normal_cdf(z)
}

/// Per-pair comparison counts from the first sample's point of view.
pub fn win_tie_loss(a: &[f64], b: &[f64], tol: f64) -> Result<(usize, usize, usize)> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut wins = 0;
    let mut ties = 0;
    let mut losses = 0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        if d.abs() <= tol {
            ties += 1;
        } else if d > 0.0 {
            wins += 1;
        } else {
            losses += 1;
        }
    }
    Ok((wins, ties, losses))
}

pub const DEFAULT_TIE_TOL: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_counts_matches() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2, 3], &[3, 2, 1]).unwrap(), 1.0 / 3.0);
        assert_eq!(accuracy(&[0, 0, 1, 1], &[0, 0, 1, 0]).unwrap(), 0.75);
        assert!(accuracy(&[1], &[1, 2]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn error_reduction_reference_points() {
        let re = percent_reduction_in_error(76.83, 79.31).unwrap();
        assert!((re - (-0.1199)).abs() < 1e-4, "{re}");
        let re = percent_reduction_in_error(78.98, 78.35).unwrap();
        assert!((re - 0.0291).abs() < 1e-4, "{re}");
        assert_eq!(percent_reduction_in_error(80.0, 80.0).unwrap(), 0.0);
        assert!(percent_reduction_in_error(99.0, 100.0).is_none());
        // Positive exactly when the treatment accuracy is higher.
        assert!(percent_reduction_in_error(81.0, 80.0).unwrap() > 0.0);
        assert!(percent_reduction_in_error(79.0, 80.0).unwrap() < 0.0);
    }

    #[test]
    fn identical_samples_are_maximally_insignificant() {
        let a = [0.8, 0.7, 0.9];
        let out = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!(out.p, 1.0);
        assert_eq!(out.direction, None);
        assert_eq!(out.n, 0);
    }

    #[test]
    fn five_uniform_positives_hit_one_over_thirty_two() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [0.5, 1.4, 2.3, 3.2, 4.1];
        let out = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(out.direction, Some(Direction::Greater));
        assert_eq!(out.statistic, 0.0);
        assert!((out.p - 1.0 / 32.0).abs() < 1e-12, "{}", out.p);
    }

    #[test]
    fn eight_pair_table_value() {
        // Two small positive differences against six larger negatives:
        // W+ = 1 + 2 = 3. The classic n=8 table gives P(W <= 3) = 5/256.
        let a = [0.1, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let b = [0.0, 0.0, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        let out = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(out.statistic, 3.0);
        assert_eq!(out.direction, Some(Direction::Less));
        assert!((out.p - 5.0 / 256.0).abs() < 1e-12, "{}", out.p);
    }

    #[test]
    fn twenty_uniform_positives_are_extreme() {
        let a: Vec<f64> = (0..20).map(|i| 1.0 + i as f64).collect();
        let b: Vec<f64> = (0..20).map(|i| 0.5 + i as f64).collect();
        let out = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(out.p < 0.001, "{}", out.p);
        assert_eq!(out.direction, Some(Direction::Greater));
        // Forced approximation stays in the same regime.
        let approx = wilcoxon_signed_rank_mode(&a, &b, WilcoxonMode::Normal).unwrap();
        assert!(approx.p < 0.01, "{}", approx.p);
    }

    #[test]
    fn tied_magnitudes_average_their_ranks() {
        // |d| = (1,1,2,2): ranks (1.5, 1.5, 3.5, 3.5). Signs +,-,+,-
        // give W+ = 5, W- = 5: a dead tie.
        let a = [1.0, 0.0, 2.0, 0.0];
        let b = [0.0, 1.0, 0.0, 2.0];
        let out = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(out.direction, None);
        assert_eq!(out.statistic, 5.0);
        assert!(out.p > 0.5, "{}", out.p);
    }

    #[test]
    fn modes_agree_on_moderate_samples() {
        let a: Vec<f64> = (0..20)
            .map(|i| (i as f64 * 0.77).sin() * 0.5 + 0.5)
            .collect();
        let b: Vec<f64> = (0..20)
            .map(|i| (i as f64 * 0.41).cos() * 0.5 + 0.45)
            .collect();
        let exact = wilcoxon_signed_rank_mode(&a, &b, WilcoxonMode::Exact).unwrap();
        let normal = wilcoxon_signed_rank_mode(&a, &b, WilcoxonMode::Normal).unwrap();
        assert_eq!(exact.statistic, normal.statistic);
        assert!((exact.p - normal.p).abs() < 0.01, "{} vs {}", exact.p, normal.p);
    }

    #[test]
    fn comparison_counts_partition_the_sample() {
        let a = [0.9, 0.8, 0.700000001, 0.6];
        let b = [0.8, 0.9, 0.7, 0.6];
        let (w, t, l) = win_tie_loss(&a, &b, 1e-6).unwrap();
        assert_eq!((w, t, l), (1, 2, 1));
        let (w, t, l) = win_tie_loss(&a, &b, 0.0).unwrap();
        assert_eq!(w + t + l, 4);
        assert!(win_tie_loss(&a, &b[..2], 0.0).is_err());
    }
}
