//! Batch front end for the label-noise library. Flag precedence for the
//! experiment command is CLI flag, then config file key, then built-in
//! default; every experiment writes its manifest before computing so the
//! run can be reproduced from that file alone.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use labelsift::diversity::Linkage;
use labelsift::ensemble::EnsembleMode;

use config::ConfigFile;

#[derive(Parser)]
#[command(name = "labelsift", version, about = "Identify and handle mislabeled training instances with a diversity-selected classifier ensemble")]
struct Cli {
    /// Master seed for every derived random stream
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread cap; defaults to the available cores
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Directory for output artifacts (default: current directory)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// What to print on stdout where both forms exist
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-readable tables
    Text,
    /// Machine-readable cell records
    Records,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Plain,
    Weighted,
    Filtered,
}

fn parse_linkage(s: &str) -> Result<Linkage, String> {
    s.parse::<Linkage>().map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Classifier output difference matrix over a corpus, plus its dendrogram
    Cod {
        /// Bundled dataset names or file paths
        #[arg(required = true)]
        datasets: Vec<String>,
        /// Learner tokens; defaults to the full registry
        #[arg(long, value_delimiter = ',')]
        learners: Vec<String>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// single, complete, or average
        #[arg(long, default_value = "average", value_parser = parse_linkage)]
        linkage: Linkage,
    },
    /// Cluster the registry by output difference and keep one learner per cluster
    SelectDiverse {
        /// Bundled dataset names or file paths
        #[arg(required = true)]
        datasets: Vec<String>,
        /// Learner tokens; defaults to the full registry
        #[arg(long, value_delimiter = ',')]
        learners: Vec<String>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value = "average", value_parser = parse_linkage)]
        linkage: Linkage,
        /// Dendrogram cut height (default 0.18)
        #[arg(long)]
        cut: Option<f64>,
        /// Cut to exactly this many clusters instead of by height
        #[arg(long)]
        clusters: Option<usize>,
    },
    /// Out-of-fold ensemble agreement score for every training instance
    Score {
        dataset: String,
        /// Ensemble learner tokens; defaults to the full registry
        #[arg(long, value_delimiter = ',')]
        ensemble: Vec<String>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
    },
    /// Remove instances whose correctness score falls below a threshold
    Filter {
        dataset: String,
        /// Ensemble learner tokens; defaults to the full registry
        #[arg(long, value_delimiter = ',')]
        ensemble: Vec<String>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Remove when (1 - score) meets this value
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Require (1 - score) to strictly exceed the threshold
        #[arg(long)]
        strict: bool,
    },
    /// Emit correctness scores as instance weights
    Weight {
        dataset: String,
        /// Ensemble learner tokens; defaults to the full registry
        #[arg(long, value_delimiter = ',')]
        ensemble: Vec<String>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
    },
    /// Train a voting ensemble and score it on a test set
    Ensemble {
        /// Training dataset
        dataset: String,
        /// Evaluation dataset; defaults to the training set itself
        #[arg(long)]
        test: Option<String>,
        /// Member learner tokens; defaults to the full registry
        #[arg(long, value_delimiter = ',')]
        members: Vec<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Plain)]
        mode: ModeArg,
        /// Folds behind the weighted and filtered modes
        #[arg(long, default_value_t = 10)]
        folds: usize,
    },
    /// Run the full (dataset x run x noise level) grid and write records
    Experiment {
        /// TOML config or a manifest from a previous run
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dataset files or bundled corpus names (default: the corpus)
        #[arg(long, value_delimiter = ',')]
        datasets: Option<Vec<String>>,
        /// Learners evaluated under each per-learner technique
        #[arg(long, value_delimiter = ',')]
        learners: Option<Vec<String>>,
        /// Treatments to measure (default: all of them)
        #[arg(long, value_delimiter = ',')]
        techniques: Option<Vec<String>>,
        /// Training-label corruption rates, each in [0,1)
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        /// Repetitions per dataset and level
        #[arg(long)]
        runs: Option<usize>,
        /// Cross-validation folds behind the correctness scores
        #[arg(long)]
        folds: Option<usize>,
        /// Committee whose agreement defines the correctness score
        #[arg(long, value_delimiter = ',')]
        diverse: Option<Vec<String>>,
        /// Removal threshold for the filtering treatments
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Re-render a records file as a human-readable report
    Report {
        /// A records.txt written by the experiment command
        records: PathBuf,
    },
}

pub(crate) fn init_pool(jobs: Option<usize>) {
    if let Some(n) = jobs {
        if n > 0 {
            // Errors only when a pool already exists, which keeps the
            // earlier, equally explicit choice.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match cli.command {
        Command::Cod {
            datasets,
            learners,
            folds,
            linkage,
        } => {
            init_pool(cli.jobs);
            commands::cmd_cod(&datasets, &learners, folds, linkage, seed, &out)
        }
        Command::SelectDiverse {
            datasets,
            learners,
            folds,
            linkage,
            cut,
            clusters,
        } => {
            init_pool(cli.jobs);
            commands::cmd_select_diverse(
                &datasets, &learners, folds, linkage, cut, clusters, seed, &out,
            )
        }
        Command::Score {
            dataset,
            ensemble,
            folds,
        } => {
            init_pool(cli.jobs);
            commands::cmd_score(&dataset, &ensemble, folds, seed, &out)
        }
        Command::Filter {
            dataset,
            ensemble,
            folds,
            threshold,
            strict,
        } => {
            init_pool(cli.jobs);
            commands::cmd_filter(&dataset, &ensemble, folds, threshold, strict, seed, &out)
        }
        Command::Weight {
            dataset,
            ensemble,
            folds,
        } => {
            init_pool(cli.jobs);
            commands::cmd_weight(&dataset, &ensemble, folds, seed, &out)
        }
        Command::Ensemble {
            dataset,
            test,
            members,
            mode,
            folds,
        } => {
            init_pool(cli.jobs);
            let mode = match mode {
                ModeArg::Plain => EnsembleMode::Plain,
                ModeArg::Weighted => EnsembleMode::Weighted { folds },
                ModeArg::Filtered => EnsembleMode::Filtered { folds },
            };
            commands::cmd_ensemble(&dataset, test.as_deref(), &members, mode, seed, &out)
        }
        Command::Experiment {
            config,
            datasets,
            learners,
            techniques,
            levels,
            runs,
            folds,
            diverse,
            threshold,
        } => {
            let flags = ConfigFile {
                datasets,
                learners,
                techniques,
                levels,
                runs,
                folds,
                seed: cli.seed,
                diverse,
                filter_threshold: threshold,
                jobs: cli.jobs,
                manifest: None,
            };
            commands::cmd_experiment(flags, config.as_deref(), cli.format, &out)
        }
        Command::Report { records } => commands::cmd_report(&records, cli.format, cli.out.as_deref()),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
