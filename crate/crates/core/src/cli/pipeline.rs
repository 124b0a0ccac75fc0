use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};

use super::config::{Algorithm, ExperimentConfig};
use crate::dataio::{
    drop_duplicates, drop_missing_labels, encode, impute_missing, load_csv, prune_correlated,
    random_sample, score_features, select_features, train_test_split, Dataset,
};
use crate::ensemble::ensemble;
use crate::executor::{
    default_workers, plan_tasks, run_parallel_with, run_serial_with, RunOptions,
};
use crate::metrics::{
    build_report, plot_tables, render_text, BenchmarkReport, DatasetFingerprint, ModeRun,
    ReportMeta,
};
use crate::Error;

/// Exit status classes of `run`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Config,
    Data,
    Runtime,
    Equivalence,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Config => 2,
            FailureKind::Data => 3,
            FailureKind::Runtime => 4,
            FailureKind::Equivalence => 5,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            FailureKind::Config => "configuration error",
            FailureKind::Data => "data error",
            FailureKind::Runtime => "runtime error",
            FailureKind::Equivalence => "equivalence violation",
        };
        match &self.error {
            Error::Config(msg) => write!(f, "{what}: {msg}"),
            Error::EquivalenceViolation(msg) => write!(f, "{what}: {msg}"),
            e => write!(f, "{what}: {e}"),
        }
    }
}

impl std::error::Error for Failure {}

trait Classify<T> {
    fn kind(self, kind: FailureKind) -> Result<T, Failure>;
}

impl<T> Classify<T> for crate::Result<T> {
    fn kind(self, kind: FailureKind) -> Result<T, Failure> {
        self.map_err(|error| Failure { kind, error })
    }
}

/// Load, clean, encode, prune, select and split the configured data.
pub fn prepare(cfg: &ExperimentConfig) -> crate::Result<(Dataset, Dataset)> {
    let mut table = load_csv(&cfg.data, &cfg.label)?;
    info!(
        "loaded {} rows x {} columns from {}",
        table.n_rows(),
        table.n_columns(),
        cfg.data.display()
    );
    if !cfg.exclude.is_empty() {
        if cfg.exclude.contains(&cfg.label) {
            return Err(Error::Config(format!(
                "cannot exclude the label column `{}`",
                cfg.label
            )));
        }
        for name in &cfg.exclude {
            if table.column_index(name).is_none() {
                warn!("excluded column `{name}` is not in the data");
            }
        }
        table = table.without_columns(&cfg.exclude);
    }
    let before = table.n_rows();
    table = drop_duplicates(&table);
    info!("dropped {} duplicate rows", before - table.n_rows());
    let before = table.n_rows();
    table = drop_missing_labels(&table, &cfg.label)?;
    info!("dropped {} rows without a label", before - table.n_rows());
    table = impute_missing(&table);
    let data = encode(&table, &cfg.label)?;
    if cfg.positive_class >= data.n_classes() {
        return Err(Error::Config(format!(
            "positive class {} but the label has {} classes",
            cfg.positive_class,
            data.n_classes()
        )));
    }

    let n_before = data.n_features();
    let mut data = prune_correlated(&data, cfg.corr_threshold)?;
    info!(
        "correlation pruning at {} kept {} of {} features",
        cfg.corr_threshold,
        data.n_features(),
        n_before
    );
    if let Some(sel) = cfg.select {
        let scores = score_features(&data, sel.method, cfg.bins)?;
        data = select_features(&data, &scores, sel.top_k)?;
        info!("kept features {:?}", data.feature_names());
    }

    let (mut train, test) = train_test_split(&data, cfg.train_fraction, cfg.seed)?;
    if cfg.algorithm == Algorithm::Svm && train.n_rows() > cfg.svm_sample {
        info!(
            "subsampling svm training set from {} to {} rows",
            train.n_rows(),
            cfg.svm_sample
        );
        train = random_sample(&train, cfg.svm_sample, cfg.seed)?;
    }
    Ok((train, test))
}

/// Runs the configured modes on prepared data and assembles the report.
pub fn execute(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
) -> crate::Result<BenchmarkReport> {
    let cores = default_workers(usize::MAX);
    let n_groups = cfg.groups.or(cfg.workers).unwrap_or(cores);
    let opts = RunOptions {
        warm_pool: cfg.warm_pool,
        ..Default::default()
    };
    let n_classes = train.n_classes();

    let serial = if cfg.mode.serial() {
        let plan = plan_tasks(&cfg.serial_grid(), n_groups, cfg.strategy)?;
        info!("serial run of {} configs", plan.n_tasks());
        let outcome = run_serial_with(&plan, train, test, &opts)?;
        let votes = ensemble(&outcome.results, n_classes)?;
        Some((outcome, votes))
    } else {
        None
    };
    let parallel = if cfg.mode.parallel() {
        let plan = plan_tasks(&cfg.grid, n_groups, cfg.strategy)?;
        let workers = cfg.workers.unwrap_or(cores);
        info!(
            "parallel run of {} configs in {} groups on up to {} workers",
            plan.n_tasks(),
            plan.groups().len(),
            workers
        );
        let outcome = run_parallel_with(&plan, train, test, workers, &opts)?;
        let votes = ensemble(&outcome.results, n_classes)?;
        Some((outcome, votes))
    } else {
        None
    };

    let meta = ReportMeta {
        algorithm: cfg.algorithm.to_string(),
        dataset: DatasetFingerprint {
            n_train: train.n_rows(),
            n_test: test.n_rows(),
            n_features: train.n_features(),
            n_classes,
            seed: cfg.seed,
        },
        strategy: cfg.strategy,
        positive_class: cfg.positive_class,
    };
    build_report(
        meta,
        serial
            .as_ref()
            .map(|(outcome, ensemble)| ModeRun { outcome, ensemble }),
        parallel
            .as_ref()
            .map(|(outcome, ensemble)| ModeRun { outcome, ensemble }),
        test.labels(),
    )
}

/// Writes `report.json`, `report.txt` and the plot-data CSVs into `dir`.
pub fn write_outputs(report: &BenchmarkReport, dir: &Path) -> crate::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = vec![
        ("report.json".to_string(), report.to_json()? + "\n"),
        ("report.txt".to_string(), render_text(report)),
    ];
    files.extend(plot_tables(report)?);
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}

/// The whole `run` subcommand after argument parsing.
///
/// Outputs are written even when serial and parallel predictions differ;
/// that case is still reported as a failure.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BenchmarkReport, Failure> {
    let (train, test) = prepare(cfg).map_err(|error| Failure {
        kind: match error {
            Error::Config(_) => FailureKind::Config,
            _ => FailureKind::Data,
        },
        error,
    })?;
    let report = execute(cfg, &train, &test).kind(FailureKind::Runtime)?;
    write_outputs(&report, &cfg.out).kind(FailureKind::Runtime)?;
    if report.equivalence_violated() {
        return Err(Failure {
            kind: FailureKind::Equivalence,
            error: Error::EquivalenceViolation(format!(
                "serial and parallel predictions differ; see {}",
                cfg.out.join("report.txt").display()
            )),
        });
    }
    Ok(report)
}
