use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    DistanceMetric, ForestParams, HyperParams, KernelKind, KnnParams, SvmParams, TreeParams,
};
use crate::dataio::{ScoreMethod, DEFAULT_CHI2_BINS};
use crate::executor::Strategy;
use crate::metrics::DEFAULT_POSITIVE_CLASS;
use crate::{Error, Result};

pub const DEFAULT_LABEL: &str = "is_canceled";
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;
pub const DEFAULT_SVM_SAMPLE: usize = 10_000;
pub const DEFAULT_CORR_THRESHOLD: f64 = 0.9;
pub const DEFAULT_OUT_DIR: &str = "parvote-out";

pub const DEFAULT_LEAF_GRID: [usize; 6] = [10, 15, 20, 30, 35, 40];
pub const DEFAULT_DEPTH_GRID: [usize; 6] = [5, 7, 9, 11, 13, 15];
pub const DEFAULT_FOREST_SPLIT: [usize; 2] = [64, 66];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Knn,
    Svm,
    Dtree,
    Rforest,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Knn => "knn",
            Algorithm::Svm => "svm",
            Algorithm::Dtree => "dtree",
            Algorithm::Rforest => "rforest",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Serial,
    Parallel,
    #[default]
    Both,
}

impl RunMode {
    pub fn serial(self) -> bool {
        self != RunMode::Parallel
    }

    pub fn parallel(self) -> bool {
        self != RunMode::Serial
    }
}

/// Flags of the `run` subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// CSV file with a header row
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the class column [default: is_canceled]
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, value_enum)]
    pub algo: Option<Algorithm>,
    /// knn: `1-20` or `1,3,5`; svm: `linear,poly,sigmoid`;
    /// dtree: `leaf:10,15` or `depth:5,7`; rforest: `64,66`
    #[arg(long)]
    pub grid: Option<String>,
    /// Forest split across tasks, e.g. `64,66` (rforest only)
    #[arg(long)]
    pub trees: Option<String>,
    /// knn distance: euclidean or manhattan
    #[arg(long)]
    pub metric: Option<String>,
    /// Worker threads [default: logical cores, capped at the group count]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Number of striped task groups [default: worker count]
    #[arg(long)]
    pub groups: Option<usize>,
    /// striped or one-per-group
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long, value_enum)]
    pub mode: Option<RunMode>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Subsample the SVM training set to at most this many rows
    #[arg(long)]
    pub svm_sample: Option<usize>,
    /// Keep the top K features by score, e.g. `chi2:10` or `anova:8`
    #[arg(long, value_name = "METHOD:K")]
    pub select_features: Option<String>,
    /// Equal-frequency bins for the chi-squared score
    #[arg(long)]
    pub bins: Option<usize>,
    /// Drop a feature correlated above this with an earlier kept one
    #[arg(long)]
    pub corr_threshold: Option<f64>,
    /// Columns to drop before preprocessing (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub exclude: Option<Vec<String>>,
    /// Start the parallel clock after all workers are up
    #[arg(long)]
    pub warm_pool: bool,
    /// Class scored as positive for precision and recall
    #[arg(long)]
    pub positive_class: Option<usize>,
    /// Output directory for report.json, report.txt and plot data
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys as the flags (snake_case)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub label: Option<String>,
    pub algo: Option<Algorithm>,
    pub grid: Option<String>,
    pub trees: Option<String>,
    pub metric: Option<String>,
    pub workers: Option<usize>,
    pub groups: Option<usize>,
    pub strategy: Option<String>,
    pub mode: Option<RunMode>,
    pub train_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub svm_sample: Option<usize>,
    pub select_features: Option<String>,
    pub bins: Option<usize>,
    pub corr_threshold: Option<f64>,
    pub exclude: Option<Vec<String>>,
    pub warm_pool: Option<bool>,
    pub positive_class: Option<usize>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                Error::Config(format!("config file {} not found", path.display()))
            }
            _ => Error::Io(e),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub method: ScoreMethod,
    pub top_k: usize,
}

impl FromStr for FeatureSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (m, k) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("feature selection `{s}` is not METHOD:K")))?;
        let method = match m.trim().to_ascii_lowercase().as_str() {
            "chi2" | "chi_squared" | "chi-squared" => ScoreMethod::ChiSquared,
            "anova" | "anova_f" | "anova-f" | "f" => ScoreMethod::AnovaF,
            other => return Err(Error::Config(format!("unknown scoring method `{other}`"))),
        };
        let top_k = k
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| {
                Error::Config(format!("feature count `{k}` must be a positive integer"))
            })?;
        Ok(Self { method, top_k })
    }
}

/// A fully resolved `run` configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub label: String,
    pub algorithm: Algorithm,
    /// Configurations timed in parallel mode (and serially, except for
    /// forests, which run serially as one merged forest).
    pub grid: Vec<HyperParams>,
    pub workers: Option<usize>,
    pub groups: Option<usize>,
    pub strategy: Strategy,
    pub mode: RunMode,
    pub train_fraction: f64,
    pub seed: u64,
    pub svm_sample: usize,
    pub select: Option<FeatureSelection>,
    pub bins: usize,
    pub corr_threshold: f64,
    pub exclude: Vec<String>,
    pub warm_pool: bool,
    pub positive_class: usize,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// The plan for serial mode.
    pub fn serial_grid(&self) -> Vec<HyperParams> {
        match self.algorithm {
            Algorithm::Rforest => {
                let total = self
                    .grid
                    .iter()
                    .map(|p| match p {
                        HyperParams::RForest(f) => f.n_trees,
                        _ => 0,
                    })
                    .sum();
                vec![HyperParams::RForest(ForestParams::new(total, self.seed))]
            }
            _ => self.grid.clone(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_count_list(s: &str, what: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(usage(format!("empty entry in {what} list `{s}`")));
        }
        let parse = |x: &str| {
            x.trim().parse::<usize>().map_err(|_| {
                usage(format!(
                    "`{x}` in {what} list is not a non-negative integer"
                ))
            })
        };
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse(a)?, parse(b)?);
                if a > b {
                    return Err(usage(format!("empty range `{item}` in {what} list")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse(item)?),
        }
    }
    Ok(out)
}

/// Expands an algorithm's grid spec into configurations.
pub fn parse_grid(
    algorithm: Algorithm,
    spec: Option<&str>,
    metric: DistanceMetric,
    seed: u64,
) -> Result<Vec<HyperParams>> {
    let grid: Vec<HyperParams> = match algorithm {
        Algorithm::Knn => {
            let ks = match spec {
                Some(s) => parse_count_list(s, "k")?,
                None => (1..=20).collect(),
            };
            ks.into_iter()
                .map(|k| HyperParams::Knn(KnnParams { k, metric }))
                .collect()
        }
        Algorithm::Svm => {
            let kernels = match spec {
                Some(s) => s
                    .split(',')
                    .map(|k| k.trim().parse::<KernelKind>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| usage(e.to_string()))?,
                None => vec![KernelKind::Linear, KernelKind::Poly, KernelKind::Sigmoid],
            };
            kernels
                .into_iter()
                .map(|k| HyperParams::Svm(SvmParams::new(k)))
                .collect()
        }
        Algorithm::Dtree => {
            let (kind, list) = match spec.map(str::trim) {
                None => ("leaf", None),
                Some(s) => match s.split_once(':') {
                    Some((kind, list)) => (kind.trim(), Some(list)),
                    None => ("leaf", Some(s)),
                },
            };
            match kind {
                "leaf" => list
                    .map_or(Ok(DEFAULT_LEAF_GRID.to_vec()), |l| {
                        parse_count_list(l, "leaf")
                    })?
                    .into_iter()
                    .map(|n| HyperParams::DTree(TreeParams::with_min_samples_leaf(n)))
                    .collect(),
                "depth" => list
                    .map_or(Ok(DEFAULT_DEPTH_GRID.to_vec()), |l| {
                        parse_count_list(l, "depth")
                    })?
                    .into_iter()
                    .map(|d| HyperParams::DTree(TreeParams::with_max_depth(d)))
                    .collect(),
                other => {
                    return Err(usage(format!(
                        "dtree grid kind `{other}` is not leaf or depth"
                    )))
                }
            }
        }
        Algorithm::Rforest => {
            let sizes = match spec {
                Some(s) => s
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<usize>()
                            .map_err(|_| usage(format!("`{x}` in tree split is not an integer")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => DEFAULT_FOREST_SPLIT.to_vec(),
            };
            ForestParams::split(seed, &sizes)
                .into_iter()
                .map(HyperParams::RForest)
                .collect()
        }
    };
    if grid.is_empty() {
        return Err(usage("grid is empty"));
    }
    for p in &grid {
        p.validate().map_err(|e| usage(e.to_string()))?;
    }
    Ok(grid)
}

/// Layers flags over the config file over defaults and validates the result.
pub fn parse_config(args: &RunArgs, file: Option<&FileConfig>) -> Result<ExperimentConfig> {
    let empty = FileConfig::default();
    let file = file.unwrap_or(&empty);

    if args.trees.is_some() && args.grid.is_some() {
        return Err(usage(
            "--trees and --grid both set the forest split; give one",
        ));
    }
    let algorithm = args.algo.or(file.algo).unwrap_or(Algorithm::Knn);
    let trees = args.trees.clone().or_else(|| file.trees.clone());
    if trees.is_some() && algorithm != Algorithm::Rforest {
        return Err(usage(format!(
            "--trees applies to rforest, not {algorithm}"
        )));
    }
    let metric_spec = args.metric.clone().or_else(|| file.metric.clone());
    if metric_spec.is_some() && algorithm != Algorithm::Knn {
        return Err(usage(format!("--metric applies to knn, not {algorithm}")));
    }
    let metric = match metric_spec.as_deref() {
        None | Some("euclidean") => DistanceMetric::Euclidean,
        Some("manhattan") => DistanceMetric::Manhattan,
        Some(other) => return Err(usage(format!("unknown distance metric `{other}`"))),
    };

    let data = args
        .data
        .clone()
        .or_else(|| file.data.clone())
        .ok_or_else(|| usage("no data file given (--data)"))?;
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let grid_spec = args
        .grid
        .clone()
        .or(args.trees.clone())
        .or_else(|| file.grid.clone())
        .or(trees);
    let grid = parse_grid(algorithm, grid_spec.as_deref(), metric, seed)?;

    let strategy = match (&args.strategy, &file.strategy) {
        (Some(s), _) => *s,
        (None, Some(s)) => s.parse()?,
        (None, None) => Strategy::default(),
    };
    let train_fraction = args
        .train_fraction
        .or(file.train_fraction)
        .unwrap_or(DEFAULT_TRAIN_FRACTION);
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(usage(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let workers = args.workers.or(file.workers);
    if workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    let groups = args.groups.or(file.groups);
    if groups == Some(0) {
        return Err(usage("--groups must be at least 1"));
    }
    let svm_sample = args
        .svm_sample
        .or(file.svm_sample)
        .unwrap_or(DEFAULT_SVM_SAMPLE);
    if svm_sample == 0 {
        return Err(usage("--svm-sample must be at least 1"));
    }
    let select = args
        .select_features
        .as_deref()
        .or(file.select_features.as_deref())
        .map(str::parse)
        .transpose()?;
    let bins = args.bins.or(file.bins).unwrap_or(DEFAULT_CHI2_BINS);
    if bins < 2 {
        return Err(usage("--bins must be at least 2"));
    }
    let corr_threshold = args
        .corr_threshold
        .or(file.corr_threshold)
        .unwrap_or(DEFAULT_CORR_THRESHOLD);
    if !(corr_threshold > 0.0 && corr_threshold <= 1.0) {
        return Err(usage(format!(
            "correlation threshold must be in (0, 1], got {corr_threshold}"
        )));
    }

    Ok(ExperimentConfig {
        data,
        label: args
            .label
            .clone()
            .or_else(|| file.label.clone())
            .unwrap_or_else(|| DEFAULT_LABEL.into()),
        algorithm,
        grid,
        workers,
        groups,
        strategy,
        mode: args.mode.or(file.mode).unwrap_or_default(),
        train_fraction,
        seed,
        svm_sample,
        select,
        bins,
        corr_threshold,
        exclude: args
            .exclude
            .clone()
            .or_else(|| file.exclude.clone())
            .unwrap_or_default(),
        warm_pool: args.warm_pool || file.warm_pool.unwrap_or(false),
        positive_class: args
            .positive_class
            .or(file.positive_class)
            .unwrap_or(DEFAULT_POSITIVE_CLASS),
        out: args
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| DEFAULT_OUT_DIR.into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(algo: Algorithm) -> RunArgs {
        RunArgs {
            data: Some("d.csv".into()),
            algo: Some(algo),
            ..Default::default()
        }
    }

    #[test]
    fn knn_defaults_to_one_through_twenty() {
        let cfg = parse_config(&args(Algorithm::Knn), None).unwrap();
        let ks: Vec<usize> = cfg
            .grid
            .iter()
            .map(|p| match p {
                HyperParams::Knn(k) => k.k,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(ks, (1..=20).collect::<Vec<_>>());
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.train_fraction, 0.7);
    }

    #[test]
    fn forest_split_totals_130() {
        let mut a = args(Algorithm::Rforest);
        a.trees = Some("64,66".into());
        let cfg = parse_config(&a, None).unwrap();
        assert_eq!(cfg.grid.len(), 2);
        assert_eq!(
            cfg.grid[1],
            HyperParams::RForest(ForestParams {
                n_trees: 66,
                seed: DEFAULT_SEED,
                first_tree: 64
            })
        );
        assert_eq!(
            cfg.serial_grid(),
            vec![HyperParams::RForest(ForestParams::new(130, DEFAULT_SEED))]
        );
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let mut a = args(Algorithm::Knn);
        a.train_fraction = Some(0.0);
        assert!(matches!(parse_config(&a, None), Err(Error::Config(_))));

        let mut a = args(Algorithm::Knn);
        a.trees = Some("64,66".into());
        assert!(parse_config(&a, None).is_err());

        let mut a = args(Algorithm::Rforest);
        a.trees = Some("64,66".into());
        a.grid = Some("10".into());
        assert!(parse_config(&a, None).is_err());

        let mut a = args(Algorithm::Knn);
        a.grid = Some("1,x".into());
        assert!(parse_config(&a, None).is_err());

        let mut a = args(Algorithm::Svm);
        a.grid = Some("rbf".into());
        assert!(parse_config(&a, None).is_err());

        let mut a = args(Algorithm::Dtree);
        a.data = None;
        assert!(parse_config(&a, None).is_err());
    }

    #[test]
    fn grid_specs() {
        let e = DistanceMetric::Euclidean;
        assert_eq!(
            parse_grid(Algorithm::Knn, Some("1-3,7"), e, 0)
                .unwrap()
                .len(),
            4
        );
        assert_eq!(parse_grid(Algorithm::Svm, None, e, 0).unwrap().len(), 3);
        let depth = parse_grid(Algorithm::Dtree, Some("depth:5,7"), e, 0).unwrap();
        assert_eq!(depth[1], HyperParams::DTree(TreeParams::with_max_depth(7)));
        assert_eq!(parse_grid(Algorithm::Dtree, None, e, 0).unwrap().len(), 6);
        assert!(parse_grid(Algorithm::Knn, Some("0"), e, 0).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = FileConfig::parse(
            "data = \"a.csv\"\nalgo = \"dtree\"\nseed = 5\ntrain_fraction = 0.8\nstrategy = \"one-per-group\"\n",
        )
        .unwrap();
        let a = RunArgs {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = parse_config(&a, Some(&file)).unwrap();
        assert_eq!(cfg.data, PathBuf::from("a.csv"));
        assert_eq!(cfg.algorithm, Algorithm::Dtree);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.train_fraction, 0.8);
        assert_eq!(cfg.strategy, Strategy::OnePerGroup);
    }

    #[test]
    fn unknown_file_keys_rejected() {
        assert!(FileConfig::parse("data = \"a.csv\"\nwrokers = 3\n").is_err());
    }

    #[test]
    fn feature_selection_spec() {
        let s: FeatureSelection = "chi2:10".parse().unwrap();
        assert_eq!((s.method, s.top_k), (ScoreMethod::ChiSquared, 10));
        assert!("anova:0".parse::<FeatureSelection>().is_err());
        assert!("gini:3".parse::<FeatureSelection>().is_err());
        assert!("anova".parse::<FeatureSelection>().is_err());
    }
}
