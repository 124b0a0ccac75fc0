//! Vote tallies shared by KNN, trees, forests and the ensemble layer.
//!
//! Every tie in the crate resolves toward the smallest class id.

use serde::{Deserialize, Serialize};

/// Index of the largest count; the first (smallest) index wins ties.
pub fn plurality<T: PartialOrd + Copy>(counts: &[T]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Row-major `n_samples × n_classes` table of vote counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTable {
    n_samples: usize,
    n_classes: usize,
    counts: Vec<u32>,
}

impl VoteTable {
    pub fn zeros(n_samples: usize, n_classes: usize) -> Self {
        Self {
            n_samples,
            n_classes,
            counts: vec![0; n_samples * n_classes],
        }
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, sample: usize) -> &[u32] {
        &self.counts[sample * self.n_classes..(sample + 1) * self.n_classes]
    }

    pub fn add_vote(&mut self, sample: usize, class_id: usize) {
        self.counts[sample * self.n_classes + class_id] += 1;
    }

    /// Element-wise sum. Panics when the shapes differ.
    pub fn accumulate(&mut self, other: &VoteTable) {
        assert_eq!(
            (self.n_samples, self.n_classes),
            (other.n_samples, other.n_classes),
            "vote table shapes differ"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn winners(&self) -> Vec<usize> {
        (0..self.n_samples)
            .map(|s| plurality(self.row(s)))
            .collect()
    }
}
