use serde::{Deserialize, Serialize};

use super::check_dims;
use super::tree::{DecisionTree, FeatureSampler, TreeParams};
use crate::dataio::{Dataset, Matrix};
use crate::rng;
use crate::vote::VoteTable;
use crate::{Error, Result};

/// A slice `[first_tree, first_tree + n_trees)` of a forest's seed schedule.
///
/// A whole forest has `first_tree = 0`; splitting it across workers assigns
/// consecutive slices that share `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub seed: u64,
    #[serde(default)]
    pub first_tree: usize,
}

impl ForestParams {
    pub fn new(n_trees: usize, seed: u64) -> Self {
        Self {
            n_trees,
            seed,
            first_tree: 0,
        }
    }

    /// Splits `sizes.iter().sum()` trees into consecutive schedule slices.
    pub fn split(seed: u64, sizes: &[usize]) -> Vec<ForestParams> {
        let mut first_tree = 0;
        sizes
            .iter()
            .map(|&n_trees| {
                let p = ForestParams {
                    n_trees,
                    seed,
                    first_tree,
                };
                first_tree += n_trees;
                p
            })
            .collect()
    }
}

/// Seed of tree `index` in the schedule of a forest seeded with `seed`.
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    rng::mix(seed, index as u64)
}

/// Bagged Gini trees; each tree sees a bootstrap sample and
/// `floor(sqrt(n_features))` random candidate features per split.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<DecisionTree>,
    tree_seeds: Vec<u64>,
    n_features: usize,
    n_classes: usize,
}

impl ForestModel {
    pub fn fit(params: &ForestParams, train: &Dataset) -> Result<Self> {
        if params.n_trees == 0 {
            return Err(Error::InvalidParams(
                "forest needs at least one tree".into(),
            ));
        }
        let n = train.n_rows();
        if n == 0 {
            return Err(Error::InvalidInput("training set is empty".into()));
        }
        let per_split = ((train.n_features() as f64).sqrt().floor() as usize).max(1);
        let tree_params = TreeParams::with_min_samples_leaf(1);

        let tree_seeds: Vec<u64> = (params.first_tree..params.first_tree + params.n_trees)
            .map(|i| tree_seed(params.seed, i))
            .collect();
        let trees = tree_seeds
            .iter()
            .map(|&s| {
                let mut g = rng::seeded(s);
                let bootstrap: Vec<usize> = (0..n).map(|_| rng::below(&mut g, n)).collect();
                let sampler = FeatureSampler {
                    rng: &mut g,
                    per_split,
                };
                DecisionTree::grow(train, bootstrap, &tree_params, Some(sampler))
            })
            .collect();

        Ok(Self {
            trees,
            tree_seeds,
            n_features: train.n_features(),
            n_classes: train.n_classes(),
        })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree_seeds(&self) -> &[u64] {
        &self.tree_seeds
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_votes(&self, features: &Matrix) -> Result<VoteTable> {
        check_dims(self.n_features, features)?;
        let mut votes = VoteTable::zeros(features.n_rows(), self.n_classes);
        for (s, row) in features.rows().enumerate() {
            for tree in &self.trees {
                votes.add_vote(s, tree.predict_row(row));
            }
        }
        Ok(votes)
    }

    pub fn predict(&self, features: &Matrix) -> Result<Vec<usize>> {
        Ok(self.class_votes(features)?.winners())
    }
}

/// Concatenates the trees of several forests into one voting forest.
pub fn forest_merge(parts: &[ForestModel]) -> Result<ForestModel> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to merge".into()))?;
    let mut merged = ForestModel {
        trees: Vec::new(),
        tree_seeds: Vec::new(),
        n_features: first.n_features,
        n_classes: first.n_classes,
    };
    for p in parts {
        if p.n_features != first.n_features {
            return Err(Error::DimensionMismatch {
                expected: first.n_features,
                actual: p.n_features,
            });
        }
        if p.n_classes != first.n_classes {
            return Err(Error::InvalidInput(format!(
                "cannot merge forests over {} and {} classes",
                first.n_classes, p.n_classes
            )));
        }
        merged.trees.extend(p.trees.iter().cloned());
        merged.tree_seeds.extend(&p.tree_seeds);
    }
    Ok(merged)
}
