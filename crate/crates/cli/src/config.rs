//! Config files and run manifests. A config is plain TOML with every
//! key optional; precedence is CLI flag, then config key, then default.
//! The manifest written next to experiment output is the same schema
//! with every value resolved plus a `[manifest]` table, so it feeds
//! straight back into `--config` to reproduce the run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use labelsift::data::{load_dataset, synth, Dataset};
use labelsift::eval::{ExperimentConfig, Technique};
use labelsift::learners::{registry, LearnerSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Bundled dataset names or file paths; paths win when both match.
    pub datasets: Option<Vec<String>>,
    pub learners: Option<Vec<String>>,
    pub techniques: Option<Vec<String>>,
    pub levels: Option<Vec<f64>>,
    pub runs: Option<usize>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub diverse: Option<Vec<String>>,
    pub filter_threshold: Option<f64>,
    pub jobs: Option<usize>,
    /// Present when the file is a manifest written by a previous run;
    /// ignored as configuration.
    pub manifest: Option<ManifestMeta>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestMeta {
    pub tool: String,
    pub version: String,
    pub created: String,
    pub command: String,
    pub config_path: String,
    pub out_dir: String,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Lower-precedence values fill this config's unset keys.
    pub fn or(mut self, fallback: ConfigFile) -> ConfigFile {
        self.datasets = self.datasets.or(fallback.datasets);
        self.learners = self.learners.or(fallback.learners);
        self.techniques = self.techniques.or(fallback.techniques);
        self.levels = self.levels.or(fallback.levels);
        self.runs = self.runs.or(fallback.runs);
        self.folds = self.folds.or(fallback.folds);
        self.seed = self.seed.or(fallback.seed);
        self.diverse = self.diverse.or(fallback.diverse);
        self.filter_threshold = self.filter_threshold.or(fallback.filter_threshold);
        self.jobs = self.jobs.or(fallback.jobs);
        self
    }

    /// Applies defaults and resolves every token, returning the runnable
    /// config plus the fully resolved file for the manifest.
    pub fn resolve(&self) -> Result<(ExperimentConfig, ConfigFile)> {
        let dataset_tokens = self
            .datasets
            .clone()
            .unwrap_or_else(|| synth::CORPUS_NAMES.iter().map(|s| s.to_string()).collect());
        let corpus: Vec<Dataset> = dataset_tokens
            .iter()
            .map(|t| resolve_dataset(t))
            .collect::<Result<_>>()?;

        let learners = parse_specs(self.learners.as_deref(), "learners")?;
        let diverse = parse_specs(self.diverse.as_deref(), "diverse")?;
        let techniques = match &self.techniques {
            None => Technique::ALL.to_vec(),
            Some(tokens) => tokens
                .iter()
                .map(|t| {
                    t.parse::<Technique>()
                        .with_context(|| format!("technique token {t:?}"))
                })
                .collect::<Result<_>>()?,
        };

        let mut cfg = ExperimentConfig::new(corpus);
        cfg.learners = learners;
        cfg.diverse = diverse;
        cfg.techniques = techniques;
        if let Some(levels) = &self.levels {
            cfg.levels = levels.clone();
        }
        if let Some(runs) = self.runs {
            cfg.runs = runs;
        }
        if let Some(folds) = self.folds {
            cfg.folds = folds;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(t) = self.filter_threshold {
            cfg.filter_threshold = t;
        }
        cfg.validate().context("validating experiment config")?;

        let resolved = ConfigFile {
            datasets: Some(dataset_tokens),
            learners: Some(cfg.learners.iter().map(|s| s.to_string()).collect()),
            techniques: Some(cfg.techniques.iter().map(|t| t.token().to_string()).collect()),
            levels: Some(cfg.levels.clone()),
            runs: Some(cfg.runs),
            folds: Some(cfg.folds),
            seed: Some(cfg.seed),
            diverse: Some(cfg.diverse.iter().map(|s| s.to_string()).collect()),
            filter_threshold: Some(cfg.filter_threshold),
            jobs: self.jobs,
            manifest: None,
        };
        Ok((cfg, resolved))
    }
}

fn parse_specs(tokens: Option<&[String]>, what: &str) -> Result<Vec<LearnerSpec>> {
    match tokens {
        None => Ok(registry()),
        Some(tokens) => tokens
            .iter()
            .map(|t| {
                t.parse::<LearnerSpec>()
                    .with_context(|| format!("{what} token {t:?}"))
            })
            .collect(),
    }
}

/// A dataset argument is a file path when one exists at that location,
/// otherwise a bundled synthetic name.
pub fn resolve_dataset(token: &str) -> Result<Dataset> {
    let path = Path::new(token);
    if path.exists() {
        return load_dataset(path).with_context(|| format!("loading dataset {token}"));
    }
    match synth::by_name(token) {
        Some(ds) => Ok(ds),
        None => bail!(
            "dataset {token:?} is neither a file nor a bundled name (bundled: {})",
            synth::CORPUS_NAMES.join(", ")
        ),
    }
}

/// Writes the manifest that makes the run reproducible: the resolved
/// config with a metadata table. Returns the manifest path.
pub fn write_manifest(
    resolved: &ConfigFile,
    command: &str,
    config_path: Option<&Path>,
    out_dir: &Path,
) -> Result<PathBuf> {
    let mut with_meta = resolved.clone();
    with_meta.manifest = Some(ManifestMeta {
        tool: "labelsift".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        created: chrono::Utc::now().to_rfc3339(),
        command: command.to_string(),
        config_path: config_path
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "-".to_string()),
        out_dir: out_dir.display().to_string(),
    });
    let text = toml::to_string_pretty(&with_meta).context("serializing manifest")?;
    let path = out_dir.join("manifest.toml");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
