use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::rng::{self, Rng};
use crate::vote::plurality;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_samples_leaf: usize,
    /// `None` grows until leaves are pure or no split helps.
    pub max_depth: Option<usize>,
}

impl TreeParams {
    pub fn with_min_samples_leaf(min_samples_leaf: usize) -> Self {
        Self {
            min_samples_leaf,
            max_depth: None,
        }
    }

    pub fn with_max_depth(max_depth: usize) -> Self {
        Self {
            min_samples_leaf: 1,
            max_depth: Some(max_depth),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidParams("min_samples_leaf must be >= 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidParams("max_depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// Gini impurity `1 - Σ (c_i / n)^2`; zero for an empty count vector.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature_index: usize,
    pub threshold: f64,
    /// Size-weighted Gini impurity of the two children.
    pub impurity: f64,
}

const MIN_IMPROVEMENT: f64 = 1e-12;

/// Best Gini split of `rows` over `candidate_features`.
///
/// Thresholds are midpoints between consecutive distinct values; rows with
/// `value <= threshold` go left. Both children must keep at least
/// `min_samples_leaf` rows. Equal impurities favour the lower feature index,
/// then the lower threshold. Returns `None` when no legal split lowers the
/// impurity of the node.
pub fn best_split(
    data: &Dataset,
    rows: &[usize],
    min_samples_leaf: usize,
    candidate_features: &[usize],
) -> Option<Split> {
    let n = rows.len();
    let msl = min_samples_leaf.max(1);
    if n < 2 || n < 2 * msl {
        return None;
    }
    let labels = data.labels();
    let n_classes = data.n_classes();
    let mut parent = vec![0usize; n_classes];
    for &r in rows {
        parent[labels[r]] += 1;
    }
    let parent_gini = gini(&parent);
    if parent_gini == 0.0 {
        return None;
    }

    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<Split> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];
    for &f in &features {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (data.row(r)[f], labels[r])));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        left.iter_mut().for_each(|c| *c = 0);

        for i in 0..n - 1 {
            left[pairs[i].1] += 1;
            let (lo, hi) = (pairs[i].0, pairs[i + 1].0);
            let n_left = i + 1;
            let n_right = n - n_left;
            if lo == hi || n_left < msl || n_right < msl {
                continue;
            }
            for c in 0..n_classes {
                right[c] = parent[c] - left[c];
            }
            let impurity = (n_left as f64 * gini(&left) + n_right as f64 * gini(&right)) / n as f64;
            if best.is_none_or(|b| impurity < b.impurity) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Split {
                    feature_index: f,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best.filter(|b| b.impurity < parent_gini - MIN_IMPROVEMENT)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        feature_index: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class_id: usize,
        n_samples: usize,
    },
}

/// Training statistics recorded for every node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStats {
    pub n_samples: usize,
    pub impurity: f64,
    pub depth: usize,
}

/// Binary classification tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    stats: Vec<NodeStats>,
    n_features: usize,
    n_classes: usize,
}

/// Random feature subsets for forest trees: `m` features per split.
pub(crate) struct FeatureSampler<'a> {
    pub rng: &'a mut Rng,
    pub per_split: usize,
}

impl DecisionTree {
    pub fn fit(params: &TreeParams, train: &Dataset) -> Result<Self> {
        params.validate()?;
        if train.n_rows() == 0 {
            return Err(Error::InvalidInput("training set is empty".into()));
        }
        Ok(Self::grow(
            train,
            (0..train.n_rows()).collect(),
            params,
            None,
        ))
    }

    /// Grows a tree on `rows` (which may repeat, as in a bootstrap sample).
    pub(crate) fn grow(
        data: &Dataset,
        rows: Vec<usize>,
        params: &TreeParams,
        mut sampler: Option<FeatureSampler<'_>>,
    ) -> Self {
        let n_classes = data.n_classes();
        let all_features: Vec<usize> = (0..data.n_features()).collect();
        let mut nodes = vec![Node::Leaf {
            class_id: 0,
            n_samples: 0,
        }];
        let mut stats = vec![NodeStats {
            n_samples: 0,
            impurity: 0.0,
            depth: 0,
        }];
        // depth-first, left child first
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, rows, 0)];

        while let Some((slot, rows, depth)) = stack.pop() {
            let mut counts = vec![0usize; n_classes];
            for &r in &rows {
                counts[data.labels()[r]] += 1;
            }
            stats[slot] = NodeStats {
                n_samples: rows.len(),
                impurity: gini(&counts),
                depth,
            };

            let may_split = params.max_depth.is_none_or(|d| depth < d);
            let split = if may_split {
                match sampler.as_mut() {
                    Some(s) => {
                        let m = s.per_split.clamp(1, all_features.len());
                        let features = rng::sample_indices(s.rng, all_features.len(), m);
                        best_split(data, &rows, params.min_samples_leaf, &features)
                    }
                    None => best_split(data, &rows, params.min_samples_leaf, &all_features),
                }
            } else {
                None
            };

            match split {
                None => {
                    nodes[slot] = Node::Leaf {
                        class_id: plurality(&counts),
                        n_samples: rows.len(),
                    };
                }
                Some(s) => {
                    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                        .iter()
                        .partition(|&&r| data.row(r)[s.feature_index] <= s.threshold);
                    let left = nodes.len();
                    let right = left + 1;
                    for _ in 0..2 {
                        nodes.push(Node::Leaf {
                            class_id: 0,
                            n_samples: 0,
                        });
                        stats.push(stats[slot]);
                    }
                    nodes[slot] = Node::Split {
                        feature_index: s.feature_index,
                        threshold: s.threshold,
                        left,
                        right,
                    };
                    stack.push((right, right_rows, depth + 1));
                    stack.push((left, left_rows, depth + 1));
                }
            }
        }

        Self {
            nodes,
            stats,
            n_features: data.n_features(),
            n_classes,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn stats(&self) -> &[NodeStats] {
        &self.stats
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        self.stats.iter().map(|s| s.depth).max().unwrap_or(0)
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class_id, .. } => return class_id,
                Node::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature_index] <= threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(values: &[f64], labels: &[usize]) -> Dataset {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Dataset::from_rows(&rows, labels.to_vec(), 2).unwrap()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[10, 0]), 0.0);
        assert_eq!(gini(&[5, 5]), 0.5);
        // 1 - (1 + 4 + 9) / 36 = 22/36
        assert!((gini(&[1, 2, 3]) - 22.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn best_split_matches_threshold_enumeration() {
        let d = one_d(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]);
        let rows = [0, 1, 2, 3];
        // oracle: try every midpoint, weighted gini by direct counting
        let mut oracle = (f64::INFINITY, f64::NAN);
        for t in [1.5, 2.5, 3.5] {
            let mut l = [0usize; 2];
            let mut r = [0usize; 2];
            for &i in &rows {
                if d.row(i)[0] <= t {
                    l[d.labels()[i]] += 1;
                } else {
                    r[d.labels()[i]] += 1;
                }
            }
            let nl = (l[0] + l[1]) as f64;
            let nr = (r[0] + r[1]) as f64;
            let w = (nl * gini(&l) + nr * gini(&r)) / 4.0;
            if w < oracle.0 {
                oracle = (w, t);
            }
        }
        let s = best_split(&d, &rows, 1, &[0]).unwrap();
        assert_eq!(s.threshold, oracle.1);
        assert_eq!(s.threshold, 2.5);
        assert_eq!(s.impurity, oracle.0);
    }

    #[test]
    fn pure_node_does_not_split() {
        let d = one_d(&[1.0, 2.0, 3.0], &[1, 1, 1]);
        assert!(best_split(&d, &[0, 1, 2], 1, &[0]).is_none());
    }

    #[test]
    fn infeasible_leaf_size_does_not_split() {
        let d = one_d(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0, 0, 1, 1, 1]);
        assert!(best_split(&d, &[0, 1, 2, 3, 4], 3, &[0]).is_none());
        assert!(best_split(&d, &[0, 1, 2, 3, 4], 2, &[0]).is_some());
    }

    #[test]
    fn ties_prefer_lower_feature() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, i as f64]).collect();
        let d = Dataset::from_rows(&rows, vec![0, 0, 1, 1], 2).unwrap();
        let s = best_split(&d, &[0, 1, 2, 3], 1, &[1, 0]).unwrap();
        assert_eq!(s.feature_index, 0);
    }

    #[test]
    fn single_class_training_gives_leaf_root() {
        let d = one_d(&[1.0, 2.0, 3.0], &[1, 1, 1]);
        let t = DecisionTree::fit(&TreeParams::with_min_samples_leaf(1), &d).unwrap();
        assert_eq!(
            t.root(),
            &Node::Leaf {
                class_id: 1,
                n_samples: 3
            }
        );
    }

    #[test]
    fn fully_grown_tree_reproduces_training_labels() {
        // 20 rows, 2 features, labels from an xor-like rule: separable
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i % 5) as f64, (i / 5) as f64 + 0.1 * (i % 3) as f64])
            .collect();
        let labels: Vec<usize> = rows
            .iter()
            .map(|r| usize::from((r[0] > 1.5) ^ (r[1] > 1.5)))
            .collect();
        let d = Dataset::from_rows(&rows, labels, 2).unwrap();
        let t = DecisionTree::fit(&TreeParams::with_min_samples_leaf(1), &d).unwrap();
        // oracle: an explicit walk over the arena, independent of predict_row
        let walk = |row: &[f64]| {
            let mut at = 0;
            loop {
                match t.nodes()[at] {
                    Node::Leaf { class_id, .. } => break class_id,
                    Node::Split {
                        feature_index,
                        threshold,
                        left,
                        right,
                    } => {
                        at = if row[feature_index] > threshold {
                            right
                        } else {
                            left
                        }
                    }
                }
            }
        };
        for i in 0..d.n_rows() {
            assert_eq!(walk(d.row(i)), d.labels()[i]);
            assert_eq!(t.predict_row(d.row(i)), d.labels()[i]);
        }
    }

    #[test]
    fn depth_and_leaf_size_limits_hold() {
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![(i as f64 * 0.731).sin(), (i as f64 * 1.37).cos()])
            .collect();
        let labels = rows
            .iter()
            .map(|r| usize::from(r[0] * r[1] > 0.05))
            .collect();
        let d = Dataset::from_rows(&rows, labels, 2).unwrap();
        for params in [
            TreeParams {
                min_samples_leaf: 7,
                max_depth: None,
            },
            TreeParams {
                min_samples_leaf: 1,
                max_depth: Some(3),
            },
            TreeParams {
                min_samples_leaf: 4,
                max_depth: Some(5),
            },
        ] {
            let t = DecisionTree::fit(&params, &d).unwrap();
            assert!(params.max_depth.is_none_or(|m| t.depth() <= m));
            for node in t.nodes() {
                if let Node::Leaf { n_samples, .. } = node {
                    assert!(*n_samples >= params.min_samples_leaf);
                }
            }
        }
    }
}
