//! From-scratch learners behind one fit/predict contract.
//!
//! All four are deterministic in their inputs: KNN and the decision tree
//! have no randomness, the SVM's working-set selection is deterministic,
//! and the random forest draws everything from per-tree seeds.

mod forest;
mod knn;
mod svm;
mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, Matrix};
use crate::vote::VoteTable;
use crate::{Error, Result};

pub use forest::{forest_merge, tree_seed, ForestModel, ForestParams};
pub use knn::{distance, knn_neighbors, DistanceMetric, KnnModel, KnnParams};
pub use svm::{fit_svm_pairwise, Kernel, KernelKind, PairModel, SvmModel, SvmParams};
pub use tree::{best_split, gini, DecisionTree, Node, Split, TreeParams};

/// One hyperparameter configuration of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum HyperParams {
    Knn(KnnParams),
    Svm(SvmParams),
    DTree(TreeParams),
    RForest(ForestParams),
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        match self {
            HyperParams::Knn(p) if p.k == 0 => {
                Err(Error::InvalidParams("knn k must be >= 1".into()))
            }
            HyperParams::Svm(p) => p.validate(),
            HyperParams::DTree(p) => p.validate(),
            HyperParams::RForest(p) if p.n_trees == 0 => Err(Error::InvalidParams(
                "forest needs at least one tree".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn algorithm(&self) -> &'static str {
        match self {
            HyperParams::Knn(_) => "knn",
            HyperParams::Svm(_) => "svm",
            HyperParams::DTree(_) => "dtree",
            HyperParams::RForest(_) => "rforest",
        }
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperParams::Knn(p) => write!(f, "k={} metric={}", p.k, p.metric),
            HyperParams::Svm(p) => write!(f, "kernel={}", p.kernel),
            HyperParams::DTree(p) => match p.max_depth {
                Some(d) => write!(f, "min_samples_leaf={} max_depth={d}", p.min_samples_leaf),
                None => write!(f, "min_samples_leaf={}", p.min_samples_leaf),
            },
            HyperParams::RForest(p) => write!(
                f,
                "trees={} (schedule {}..{})",
                p.n_trees,
                p.first_tree,
                p.first_tree + p.n_trees
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Knn(KnnModel),
    Svm(SvmModel),
    DTree(DecisionTree),
    RForest(ForestModel),
}

/// Trains a model; the result depends only on `params` and `train`.
pub fn fit(params: &HyperParams, train: &Dataset) -> Result<TrainedModel> {
    params.validate()?;
    if train.n_rows() == 0 {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    Ok(match params {
        HyperParams::Knn(p) => TrainedModel::Knn(KnnModel::fit(p, train)?),
        HyperParams::Svm(p) => TrainedModel::Svm(fit_svm_pairwise(p, train)?),
        HyperParams::DTree(p) => TrainedModel::DTree(DecisionTree::fit(p, train)?),
        HyperParams::RForest(p) => TrainedModel::RForest(ForestModel::fit(p, train)?),
    })
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.n_features(),
            TrainedModel::Svm(m) => m.n_features(),
            TrainedModel::DTree(m) => m.n_features(),
            TrainedModel::RForest(m) => m.n_features(),
        }
    }

    pub fn predict(&self, features: &Matrix) -> Result<Vec<usize>> {
        check_dims(self.n_features(), features)?;
        Ok(match self {
            TrainedModel::Knn(m) => features.rows().map(|r| m.predict_row(r)).collect(),
            TrainedModel::Svm(m) => features.rows().map(|r| m.predict_row(r)).collect(),
            TrainedModel::DTree(m) => features.rows().map(|r| m.predict_row(r)).collect(),
            TrainedModel::RForest(m) => m.class_votes(features)?.winners(),
        })
    }

    /// Per-tree vote counts, for models that vote internally (forests).
    pub fn class_votes(&self, features: &Matrix) -> Result<Option<VoteTable>> {
        match self {
            TrainedModel::RForest(m) => m.class_votes(features).map(Some),
            _ => Ok(None),
        }
    }

    /// Non-fatal training diagnostics, e.g. an SVM that hit its iteration cap.
    pub fn warnings(&self) -> Vec<String> {
        match self {
            TrainedModel::Svm(m) => m.warnings(),
            _ => Vec::new(),
        }
    }
}

pub(crate) fn check_dims(expected: usize, features: &Matrix) -> Result<()> {
    if features.n_cols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: features.n_cols(),
        });
    }
    Ok(())
}
