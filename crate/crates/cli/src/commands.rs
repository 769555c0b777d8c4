//! One function per subcommand. Each resolves its inputs, calls the
//! library, writes its artifact files under the output directory, and
//! prints a short summary (or the full report) to stdout. Nothing here
//! modifies an input file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use labelsift::data::{save_csv, Dataset};
use labelsift::diversity::{
    agglomerative_cluster, diverse_set, scan_corpus, CutRule, Linkage, DEFAULT_CUT,
};
use labelsift::ensemble::{build_ensemble, EnsembleMode};
use labelsift::eval::{self, report, ExperimentReport};
use labelsift::learners::LearnerSpec;
use labelsift::noiseid::{
    estimate_correctness, l_filter_with, l_weights, CorrectnessScores, ThresholdRule,
};

use crate::config::{resolve_dataset, write_manifest, ConfigFile};
use crate::Format;

fn parse_specs(tokens: &[String]) -> Result<Vec<LearnerSpec>> {
    if tokens.is_empty() {
        return Ok(labelsift::learners::registry());
    }
    tokens
        .iter()
        .map(|t| {
            t.parse::<LearnerSpec>()
                .with_context(|| format!("learner token {t:?}"))
        })
        .collect()
}

fn resolve_corpus(tokens: &[String]) -> Result<Vec<Dataset>> {
    tokens.iter().map(|t| resolve_dataset(t)).collect()
}

fn write_artifact(out: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let path = out.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_cod(
    datasets: &[String],
    learners: &[String],
    folds: usize,
    linkage: Linkage,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let corpus = resolve_corpus(datasets)?;
    let specs = parse_specs(learners)?;
    let scan = scan_corpus(&specs, &corpus, folds, seed).context("scanning the corpus")?;
    let dendro = agglomerative_cluster(&scan.matrix, linkage);
    write_artifact(out, "cod_matrix.txt", &scan.matrix.to_text())?;
    write_artifact(out, "dendrogram.txt", &dendro.to_text())?;
    print!("{}", scan.matrix.to_text());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_select_diverse(
    datasets: &[String],
    learners: &[String],
    folds: usize,
    linkage: Linkage,
    cut: Option<f64>,
    clusters: Option<usize>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let corpus = resolve_corpus(datasets)?;
    let specs = parse_specs(learners)?;
    let rule = match (cut, clusters) {
        (Some(_), Some(_)) => bail!("--cut and --clusters are mutually exclusive"),
        (Some(h), None) => CutRule::Height(h),
        (None, Some(k)) => CutRule::Clusters(k),
        (None, None) => DEFAULT_CUT,
    };
    let chosen =
        diverse_set(&specs, &corpus, folds, seed, linkage, rule).context("selecting learners")?;

    // The matrix and dendrogram are written alongside for audit.
    let scan = scan_corpus(&specs, &corpus, folds, seed).context("scanning the corpus")?;
    let dendro = agglomerative_cluster(&scan.matrix, linkage);
    write_artifact(out, "cod_matrix.txt", &scan.matrix.to_text())?;
    write_artifact(out, "dendrogram.txt", &dendro.to_text())?;
    let tokens: Vec<String> = chosen.iter().map(|s| s.to_string()).collect();
    write_artifact(out, "diverse.txt", &format!("{}\n", tokens.join("\n")))?;
    println!("{}", tokens.join("\n"));
    Ok(())
}

fn scores_for(
    dataset: &str,
    ensemble: &[String],
    folds: usize,
    seed: u64,
) -> Result<(Dataset, CorrectnessScores)> {
    let ds = resolve_dataset(dataset)?;
    let specs = parse_specs(ensemble)?;
    let scores =
        estimate_correctness(&specs, &ds, folds, seed).context("estimating correctness")?;
    Ok((ds, scores))
}

pub fn cmd_score(
    dataset: &str,
    ensemble: &[String],
    folds: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let (_, scores) = scores_for(dataset, ensemble, folds, seed)?;
    write_artifact(out, "scores.txt", &scores.to_text())?;
    let mean = scores.scores.iter().sum::<f64>() / scores.scores.len() as f64;
    println!(
        "scored {} instances with an ensemble of {}; mean correctness {mean:.4}",
        scores.scores.len(),
        scores.ensemble_size
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_filter(
    dataset: &str,
    ensemble: &[String],
    folds: usize,
    threshold: f64,
    strict: bool,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let (ds, scores) = scores_for(dataset, ensemble, folds, seed)?;
    let rule = if strict {
        ThresholdRule::Strict
    } else {
        ThresholdRule::AtLeast
    };
    let outcome = l_filter_with(&ds, &scores, threshold, rule).context("filtering")?;
    write_artifact(out, "filter.txt", &outcome.to_text())?;
    std::fs::create_dir_all(out)?;
    let kept_path = out.join("kept.csv");
    save_csv(&ds.subset(&outcome.kept), &kept_path)
        .with_context(|| format!("writing {}", kept_path.display()))?;
    println!(
        "kept {} of {} instances (removed {}) at threshold {threshold}",
        outcome.kept.len(),
        ds.len(),
        outcome.removed.len()
    );
    Ok(())
}

pub fn cmd_weight(
    dataset: &str,
    ensemble: &[String],
    folds: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let (_, scores) = scores_for(dataset, ensemble, folds, seed)?;
    let weights = l_weights(&scores);
    let mut text = String::from("instance-weights v1\n");
    text.push_str(&format!("count: {}\n", weights.len()));
    for (i, w) in weights.iter().enumerate() {
        text.push_str(&format!("{i} {w}\n"));
    }
    write_artifact(out, "weights.txt", &text)?;
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    println!("weighted {} instances; mean weight {mean:.4}", weights.len());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_ensemble(
    dataset: &str,
    test: Option<&str>,
    members: &[String],
    mode: EnsembleMode,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let train_ds = resolve_dataset(dataset)?;
    let specs = parse_specs(members)?;
    let ens = build_ensemble(&specs, &train_ds, mode, seed).context("building the ensemble")?;

    let eval_ds = match test {
        Some(t) => resolve_dataset(t)?,
        None => train_ds.clone(),
    };
    let mut text = String::from("predictions v1\n");
    text.push_str(&format!("count: {}\n", eval_ds.len()));
    let mut hits = 0usize;
    for (i, inst) in eval_ds.instances().iter().enumerate() {
        let pred = ens.vote(inst).context("voting")?;
        if pred == inst.label {
            hits += 1;
        }
        text.push_str(&format!("{i} {}\n", eval_ds.classes()[pred]));
    }
    write_artifact(out, "predictions.txt", &text)?;
    println!(
        "ensemble of {} voted on {} ({} instances): accuracy {:.4}",
        ens.members().len(),
        eval_ds.name(),
        eval_ds.len(),
        hits as f64 / eval_ds.len() as f64
    );
    Ok(())
}

pub fn cmd_experiment(
    flags: ConfigFile,
    config_path: Option<&Path>,
    format: Format,
    out: &Path,
) -> Result<()> {
    let merged = match config_path {
        Some(p) => flags.or(ConfigFile::read(p)?),
        None => flags,
    };
    crate::init_pool(merged.jobs);
    let (cfg, resolved) = merged.resolve()?;

    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    // The manifest lands before any cell runs, so even an interrupted
    // run is reproducible.
    write_manifest(&resolved, "experiment", config_path, out)?;

    let report_data = eval::run_experiment(&cfg).context("running the experiment")?;
    let records = report_data.to_records_text();
    let human = report::render(&report_data);
    write_artifact(out, "records.txt", &records)?;
    write_artifact(out, "report.txt", &human)?;

    match format {
        Format::Records => print!("{records}"),
        Format::Text => print!("{human}"),
    }
    Ok(())
}

pub fn cmd_report(records_path: &Path, format: Format, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(records_path)
        .with_context(|| format!("reading {}", records_path.display()))?;
    let report_data = ExperimentReport::from_records_text(&text)
        .with_context(|| format!("parsing {}", records_path.display()))?;
    match format {
        Format::Records => print!("{}", report_data.to_records_text()),
        Format::Text => {
            let human = report::render(&report_data);
            if let Some(out) = out {
                write_artifact(out, "report.txt", &human)?;
            }
            print!("{human}");
        }
    }
    Ok(())
}
