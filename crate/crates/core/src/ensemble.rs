//! Majority-vote ensembling of per-configuration predictions.

use serde::{Deserialize, Serialize};

use crate::executor::ConfigResult;
use crate::vote::VoteTable;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub predictions: Vec<usize>,
    pub vote_counts: VoteTable,
    pub n_voters: usize,
}

fn check_lengths(results: &[ConfigResult]) -> Result<usize> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidInput("no results to ensemble".into()))?;
    let expected = first.predictions.len();
    for r in results {
        if r.predictions.len() != expected {
            return Err(Error::LengthMismatch {
                config_id: r.config_id,
                expected,
                actual: r.predictions.len(),
            });
        }
    }
    Ok(expected)
}

/// One vote per configuration per sample; plurality wins, ties go to the
/// smallest class id.
pub fn majority_vote(results: &[ConfigResult], n_classes: usize) -> Result<EnsembleResult> {
    let n_samples = check_lengths(results)?;
    let mut votes = VoteTable::zeros(n_samples, n_classes);
    for r in results {
        for (s, &class_id) in r.predictions.iter().enumerate() {
            if class_id >= n_classes {
                return Err(Error::ClassOutOfRange {
                    class_id,
                    n_classes,
                });
            }
            votes.add_vote(s, class_id);
        }
    }
    Ok(EnsembleResult {
        predictions: votes.winners(),
        vote_counts: votes,
        n_voters: results.len(),
    })
}

/// Pools the tree votes of split forests into one forest-level vote.
///
/// Equivalent to predicting with the merged forest; every tree is a voter.
pub fn forest_vote(results: &[ConfigResult], n_classes: usize) -> Result<EnsembleResult> {
    let n_samples = check_lengths(results)?;
    let mut votes = VoteTable::zeros(n_samples, n_classes);
    for r in results {
        let table = r.class_votes.as_ref().ok_or_else(|| Error::TaskFailed {
            config_id: r.config_id,
            message: "forest result carries no tree votes".into(),
        })?;
        if table.n_samples() != n_samples || table.n_classes() != n_classes {
            return Err(Error::LengthMismatch {
                config_id: r.config_id,
                expected: n_samples,
                actual: table.n_samples(),
            });
        }
        votes.accumulate(table);
    }
    // each tree votes once per sample, so any row sums to the tree count
    let n_voters = if n_samples > 0 {
        votes.row(0).iter().map(|&c| c as usize).sum()
    } else {
        0
    };
    Ok(EnsembleResult {
        predictions: votes.winners(),
        vote_counts: votes,
        n_voters,
    })
}

/// Forest results are pooled tree-wise; everything else votes per config.
pub fn ensemble(results: &[ConfigResult], n_classes: usize) -> Result<EnsembleResult> {
    if !results.is_empty() && results.iter().all(|r| r.class_votes.is_some()) {
        forest_vote(results, n_classes)
    } else {
        majority_vote(results, n_classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{HyperParams, KnnParams};

    fn voter(config_id: usize, predictions: Vec<usize>) -> ConfigResult {
        ConfigResult {
            config_id,
            params: HyperParams::Knn(KnnParams::new(config_id + 1)),
            predictions,
            class_votes: None,
            fit_seconds: 0.0,
            predict_seconds: 0.0,
            warnings: vec![],
        }
    }

    #[test]
    fn single_voter_is_identity() {
        let e = majority_vote(&[voter(0, vec![1, 0, 2])], 3).unwrap();
        assert_eq!(e.predictions, vec![1, 0, 2]);
        assert_eq!(e.n_voters, 1);
    }

    #[test]
    fn unanimous() {
        let vs: Vec<_> = (0..3).map(|i| voter(i, vec![1])).collect();
        let e = majority_vote(&vs, 2).unwrap();
        assert_eq!(e.predictions, vec![1]);
        assert_eq!(e.vote_counts.row(0), &[0, 3]);
    }

    #[test]
    fn two_voter_patterns() {
        for a in 0..2 {
            for b in 0..2 {
                let e = majority_vote(&[voter(0, vec![a]), voter(1, vec![b])], 2).unwrap();
                // a tie only happens when they disagree, and then 0 wins
                let expected = if a == b { a } else { 0 };
                assert_eq!(e.predictions[0], expected, "{a} {b}");
            }
        }
    }

    #[test]
    fn length_mismatch_names_config() {
        let err = majority_vote(&[voter(0, vec![0, 1]), voter(4, vec![0])], 2).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { config_id: 4, .. }));
    }

    #[test]
    fn empty_and_out_of_range() {
        assert!(majority_vote(&[], 2).is_err());
        assert!(majority_vote(&[voter(0, vec![2])], 2).is_err());
    }

    #[test]
    fn forest_votes_are_pooled() {
        let mut a = VoteTable::zeros(2, 2);
        a.add_vote(0, 1);
        a.add_vote(1, 0);
        let mut b = VoteTable::zeros(2, 2);
        b.add_vote(0, 1);
        b.add_vote(0, 0);
        b.add_vote(1, 1);
        b.add_vote(1, 1);
        let mut ra = voter(0, a.winners());
        ra.class_votes = Some(a);
        let mut rb = voter(1, b.winners());
        rb.class_votes = Some(b);
        let e = ensemble(&[ra, rb], 2).unwrap();
        assert_eq!(e.n_voters, 3);
        assert_eq!(e.vote_counts.row(0), &[1, 2]);
        assert_eq!(e.predictions, vec![1, 1]);
    }
}
