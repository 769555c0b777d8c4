//! Turns raw cell records into the summary tables people actually read:
//! mean accuracy per technique and learner at each noise level, error
//! reduction relative to doing nothing, and paired significance against
//! a baseline over per-dataset means.

use super::stats::{percent_reduction_in_error, wilcoxon_signed_rank, win_tie_loss, Direction,
    WilcoxonOutcome, DEFAULT_TIE_TOL};
use super::{ExperimentReport, Technique};
use crate::Result;

/// Mean over datasets of the percent error reduction a treatment
/// achieved against the untreated cell at the same level. None when no
/// dataset has both sides defined (missing cells or perfect baselines).
pub fn mean_percent_reduction(
    report: &ExperimentReport,
    learner: &str,
    technique: Technique,
    level: f64,
) -> Option<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for ds in report.datasets() {
        let orig = report.dataset_mean(&ds, learner, Technique::None, level);
        let noise = report.dataset_mean(&ds, learner, technique, level);
        if let (Some(o), Some(n)) = (orig, noise) {
            if let Some(re) = percent_reduction_in_error(n * 100.0, o * 100.0) {
                total += re;
                count += 1;
            }
        }
    }
    (count > 0).then(|| total / count as f64)
}

/// Paired comparison of a technique against a baseline at one level:
/// the samples are per-dataset mean accuracies. Returns the signed-rank
/// outcome and (win, tie, loss) counts from the technique's side, or
/// None when fewer than one dataset has both cells.
pub fn compare_to_baseline(
    report: &ExperimentReport,
    learner: &str,
    technique: Technique,
    baseline_learner: &str,
    baseline: Technique,
    level: f64,
) -> Result<Option<(WilcoxonOutcome, (usize, usize, usize))>> {
    let mut ours = Vec::new();
    let mut theirs = Vec::new();
    for ds in report.datasets() {
        let a = report.dataset_mean(&ds, learner, technique, level);
        let b = report.dataset_mean(&ds, baseline_learner, baseline, level);
        if let (Some(a), Some(b)) = (a, b) {
            ours.push(a);
            theirs.push(b);
        }
    }
    if ours.is_empty() {
        return Ok(None);
    }
    let outcome = wilcoxon_signed_rank(&ours, &theirs)?;
    let wtl = win_tie_loss(&ours, &theirs, DEFAULT_TIE_TOL)?;
    Ok(Some((outcome, wtl)))
}

fn present_levels(report: &ExperimentReport) -> Vec<f64> {
    let mut bits: Vec<u64> = report.records.iter().map(|r| r.level.to_bits()).collect();
    bits.sort_unstable();
    bits.dedup();
    let mut levels: Vec<f64> = bits.into_iter().map(f64::from_bits).collect();
    levels.sort_by(|a, b| a.total_cmp(b));
    levels
}

fn present_learners(report: &ExperimentReport) -> Vec<String> {
    let mut names: Vec<String> = report
        .records
        .iter()
        .map(|r| r.learner.clone())
        .filter(|l| l != "-")
        .collect();
    names.sort();
    names.dedup();
    names
}

fn present_techniques(report: &ExperimentReport) -> Vec<Technique> {
    Technique::ALL
        .into_iter()
        .filter(|t| report.records.iter().any(|r| r.technique == *t))
        .collect()
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:.2}", v * 100.0),
        None => ".".to_string(),
    }
}

fn push_row(out: &mut String, cells: &[String], widths: &[usize]) {
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        out.push_str(&format!("{:>width$}", cell, width = widths[i]));
    }
    // Trailing spaces would vary with column content; keep lines clean.
    while out.ends_with(' ') {
        out.pop();
    }
    out.push('\n');
}

fn render_table(title: &str, header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = format!("{title}\n");
    push_row(&mut out, header, &widths);
    for row in rows {
        push_row(&mut out, row, &widths);
    }
    out
}

/// Full text report: one accuracy table per noise level, percent error
/// reduction tables for the corrupted levels, significance lines, and
/// an error appendix when cells failed. Deterministic for a given
/// record set.
pub fn render(report: &ExperimentReport) -> String {
    let levels = present_levels(report);
    let learners = present_learners(report);
    let techniques = present_techniques(report);
    let has_ensembles = techniques.iter().any(|t| t.is_ensemble());

    let mut header: Vec<String> = vec!["technique".to_string()];
    header.extend(learners.iter().cloned());
    if has_ensembles {
        header.push("ensemble".to_string());
    }

    let mut out = String::new();
    for &level in &levels {
        let mut rows = Vec::new();
        for &tech in &techniques {
            let mut row = vec![tech.token().to_string()];
            for learner in &learners {
                let v = if tech.is_ensemble() {
                    None
                } else {
                    report.mean_accuracy(learner, tech, level)
                };
                row.push(fmt_cell(v));
            }
            if has_ensembles {
                let v = if tech.is_ensemble() {
                    report.mean_accuracy("-", tech, level)
                } else {
                    None
                };
                row.push(fmt_cell(v));
            }
            rows.push(row);
        }
        out.push_str(&render_table(
            &format!("== mean accuracy (%) at noise level {level} =="),
            &header,
            &rows,
        ));
        out.push('\n');
    }

    for &level in &levels {
        if level == 0.0 {
            continue;
        }
        let relevant: Vec<Technique> = techniques
            .iter()
            .copied()
            .filter(|t| !t.is_ensemble() && *t != Technique::None)
            .collect();
        if relevant.is_empty() || learners.is_empty() {
            continue;
        }
        let mut rows = Vec::new();
        for &tech in &relevant {
            let mut row = vec![tech.token().to_string()];
            for learner in &learners {
                let v = mean_percent_reduction(report, learner, tech, level);
                row.push(match v {
                    Some(v) => format!("{v:+.4}"),
                    None => ".".to_string(),
                });
            }
            rows.push(row);
        }
        let mut hdr: Vec<String> = vec!["technique".to_string()];
        hdr.extend(learners.iter().cloned());
        out.push_str(&render_table(
            &format!("== error reduction vs untreated at noise level {level} =="),
            &hdr,
            &rows,
        ));
        out.push('\n');
    }

    let sig = render_significance(report, &levels, &learners, &techniques);
    if !sig.is_empty() {
        out.push_str("== paired signed-rank tests over per-dataset means ==\n");
        out.push_str(&sig);
        out.push('\n');
    }

    let failures: Vec<&super::CellRecord> = report
        .records
        .iter()
        .filter(|r| r.outcome.is_err())
        .collect();
    if !failures.is_empty() {
        out.push_str(&format!("== {} failed cells ==\n", failures.len()));
        for r in failures {
            out.push_str(&format!(
                "{} {} {} level {} run {}: {}\n",
                r.dataset,
                r.learner,
                r.technique.token(),
                r.level,
                r.run,
                r.outcome.as_ref().unwrap_err()
            ));
        }
    }

    out
}

fn render_significance(
    report: &ExperimentReport,
    levels: &[f64],
    learners: &[String],
    techniques: &[Technique],
) -> String {
    let mut out = String::new();
    let mut line = |learner: &str,
                    tech: Technique,
                    base_learner: &str,
                    base: Technique,
                    level: f64| {
        if let Ok(Some((w, (wins, ties, losses)))) =
            compare_to_baseline(report, learner, tech, base_learner, base, level)
        {
            let dir = match w.direction {
                Some(Direction::Greater) => "greater",
                Some(Direction::Less) => "less",
                None => "even",
            };
            let who = if learner == "-" {
                format!("{} vs {}", tech.token(), base.token())
            } else {
                format!("{} vs {} [{learner}]", tech.token(), base.token())
            };
            out.push_str(&format!(
                "{who} @ {level}: p={:.4} ({dir}), w/t/l {wins}/{ties}/{losses}\n",
                w.p
            ));
        }
    };

    for &level in levels {
        for &tech in techniques {
            if tech.is_ensemble() {
                if tech != Technique::ThreeEnsemble
                    && techniques.contains(&Technique::ThreeEnsemble)
                {
                    line("-", tech, "-", Technique::ThreeEnsemble, level);
                }
            } else if tech != Technique::None && techniques.contains(&Technique::None) {
                for learner in learners {
                    line(learner, tech, learner, Technique::None, level);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::CellRecord;

    fn cell(ds: &str, learner: &str, tech: Technique, level: f64, run: usize, acc: f64) -> CellRecord {
        CellRecord {
            dataset: ds.into(),
            learner: learner.into(),
            technique: tech,
            level,
            run,
            outcome: Ok(acc),
        }
    }

    fn fixture() -> ExperimentReport {
        // Two datasets, one learner, levels 0 and 0.3, two runs each.
        let mut records = Vec::new();
        for (ds, none_acc, filt_acc) in [("d1", 0.8, 0.9), ("d2", 0.6, 0.7)] {
            for run in 0..2 {
                records.push(cell(ds, "knn:k=1", Technique::None, 0.3, run, none_acc));
                records.push(cell(ds, "knn:k=1", Technique::LFilter, 0.3, run, filt_acc));
                records.push(cell(ds, "knn:k=1", Technique::None, 0.0, run, 1.0));
                records.push(cell(ds, "-", Technique::LEnsemble, 0.3, run, filt_acc));
                records.push(cell(ds, "-", Technique::ThreeEnsemble, 0.3, run, none_acc));
            }
        }
        ExperimentReport { records }
    }

    #[test]
    fn reduction_matches_hand_arithmetic() {
        let report = fixture();
        // d1: (90-80)/(100-80) = 0.5; d2: (70-60)/(100-60) = 0.25.
        let re = mean_percent_reduction(&report, "knn:k=1", Technique::LFilter, 0.3).unwrap();
        assert!((re - 0.375).abs() < 1e-12, "{re}");
    }

    #[test]
    fn reduction_undefined_against_perfect_baseline() {
        let report = fixture();
        // At level 0 the untreated accuracy is exactly 1, and no filter
        // cells exist there anyway.
        assert_eq!(
            mean_percent_reduction(&report, "knn:k=1", Technique::LFilter, 0.0),
            None
        );
    }

    #[test]
    fn baseline_comparison_counts_wins() {
        let report = fixture();
        let (w, (wins, ties, losses)) = compare_to_baseline(
            &report,
            "knn:k=1",
            Technique::LFilter,
            "knn:k=1",
            Technique::None,
            0.3,
        )
        .unwrap()
        .unwrap();
        assert_eq!((wins, ties, losses), (2, 0, 0));
        assert_eq!(w.direction, Some(Direction::Greater));
        assert_eq!(w.n, 2);
    }

    #[test]
    fn ensemble_comparison_uses_dash_learner() {
        let report = fixture();
        let got = compare_to_baseline(
            &report,
            "-",
            Technique::LEnsemble,
            "-",
            Technique::ThreeEnsemble,
            0.3,
        )
        .unwrap()
        .unwrap();
        assert_eq!(got.1, (2, 0, 0));
    }

    #[test]
    fn rendering_is_deterministic_and_complete() {
        let report = fixture();
        let a = render(&report);
        let b = render(&report);
        assert_eq!(a, b);
        assert!(a.contains("mean accuracy (%) at noise level 0.3"));
        assert!(a.contains("error reduction vs untreated at noise level 0.3"));
        assert!(a.contains("l_ensemble vs 3_ensemble @ 0.3"));
        assert!(a.contains("l_filter vs none [knn:k=1] @ 0.3"));
        assert!(!a.contains("failed cells"));
    }

    #[test]
    fn failures_are_listed() {
        let mut report = fixture();
        report.records.push(CellRecord {
            dataset: "d1".into(),
            learner: "knn:k=1".into(),
            technique: Technique::Cvc,
            level: 0.3,
            run: 0,
            outcome: Err("partition too small".into()),
        });
        let text = render(&report);
        assert!(text.contains("== 1 failed cells =="));
        assert!(text.contains("partition too small"));
    }
}
