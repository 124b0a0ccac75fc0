use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, Matrix};
use crate::vote::plurality;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    Euclidean,
    Manhattan,
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Manhattan => "manhattan",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub metric: DistanceMetric,
}

impl KnnParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            metric: DistanceMetric::Euclidean,
        }
    }
}

pub fn distance(metric: DistanceMetric, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        DistanceMetric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        DistanceMetric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
    }
}

/// Brute-force k-nearest-neighbour classifier. Fitting stores the data.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    train_features: Matrix,
    train_labels: Vec<usize>,
    n_classes: usize,
    params: KnnParams,
}

impl KnnModel {
    pub fn fit(params: &KnnParams, train: &Dataset) -> Result<Self> {
        if params.k == 0 || params.k > train.n_rows() {
            return Err(Error::InvalidParams(format!(
                "knn k={} needs 1 <= k <= {} training rows",
                params.k,
                train.n_rows()
            )));
        }
        Ok(Self {
            train_features: train.features().clone(),
            train_labels: train.labels().to_vec(),
            n_classes: train.n_classes(),
            params: *params,
        })
    }

    pub fn train_features(&self) -> &Matrix {
        &self.train_features
    }

    pub fn train_labels(&self) -> &[usize] {
        &self.train_labels
    }

    pub fn params(&self) -> &KnnParams {
        &self.params
    }

    pub fn n_features(&self) -> usize {
        self.train_features.n_cols()
    }

    pub fn predict_row(&self, query: &[f64]) -> usize {
        let mut counts = vec![0u32; self.n_classes];
        for (idx, _) in knn_neighbors(self, query) {
            counts[self.train_labels[idx]] += 1;
        }
        plurality(&counts)
    }
}

fn by_distance_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// The `k` nearest training rows as `(index, distance)`, nearest first;
/// equal distances keep the lower training index.
pub fn knn_neighbors(model: &KnnModel, query: &[f64]) -> Vec<(usize, f64)> {
    let k = model.params.k;
    let mut all: Vec<(usize, f64)> = model
        .train_features
        .rows()
        .enumerate()
        .map(|(i, row)| (i, distance(model.params.metric, row, query)))
        .collect();
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, by_distance_then_index);
        all.truncate(k);
    }
    all.sort_unstable_by(by_distance_then_index);
    all
}
