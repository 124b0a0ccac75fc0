use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::{Error, Result};

pub const DEFAULT_CHI2_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    ChiSquared,
    AnovaF,
}

/// Strength of association between one feature and the class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature_name: String,
    pub statistic: f64,
    pub method: ScoreMethod,
}

fn n_label_classes(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |&m| m + 1)
}

/// Bin index of every value under equal-frequency binning.
///
/// Cut points are the order statistics at `b·n/n_bins`; equal cut points
/// collapse, so heavily tied features end up with fewer bins. A value falls
/// in the bin given by how many cut points are `<=` it.
fn equal_frequency_bins(values: &[f64], n_bins: usize) -> (usize, Vec<usize>) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut cuts: Vec<f64> = (1..n_bins).map(|b| sorted[b * n / n_bins]).collect();
    cuts.dedup();
    // a cut equal to the minimum would leave bin 0 empty
    cuts.retain(|&c| c > sorted[0]);
    let bins = values
        .iter()
        .map(|&x| cuts.partition_point(|&c| c <= x))
        .collect();
    (cuts.len() + 1, bins)
}

/// Pearson chi-squared statistic of the (binned feature × class) table.
///
/// Cells with zero expected count are skipped; a constant feature scores 0.
pub fn chi_squared_score(feature: &[f64], labels: &[usize], n_bins: usize) -> Result<FeatureScore> {
    if feature.len() != labels.len() || feature.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "chi-squared needs equal-length inputs of at least 2 samples, got {} and {}",
            feature.len(),
            labels.len()
        )));
    }
    if n_bins < 2 {
        return Err(Error::InvalidInput(
            "chi-squared needs at least 2 bins".into(),
        ));
    }
    let score = |statistic| FeatureScore {
        feature_name: String::new(),
        statistic,
        method: ScoreMethod::ChiSquared,
    };

    let (n_used, bins) = equal_frequency_bins(feature, n_bins);
    if n_used < 2 {
        return Ok(score(0.0));
    }
    let n_classes = n_label_classes(labels);
    let mut observed = vec![vec![0.0f64; n_classes]; n_used];
    for (&b, &c) in bins.iter().zip(labels) {
        observed[b][c] += 1.0;
    }
    let total = feature.len() as f64;
    let row_totals: Vec<f64> = observed.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<f64> = (0..n_classes)
        .map(|c| observed.iter().map(|r| r[c]).sum())
        .collect();

    let mut stat = 0.0;
    for (b, row) in observed.iter().enumerate() {
        for (c, &o) in row.iter().enumerate() {
            let expected = row_totals[b] * col_totals[c] / total;
            if expected > 0.0 {
                stat += (o - expected).powi(2) / expected;
            }
        }
    }
    Ok(score(stat))
}

/// One-way ANOVA F statistic of the feature grouped by class.
///
/// When every group is internally constant but group means differ, the
/// statistic is unbounded and `f64::MAX` is returned in its place.
pub fn anova_f_score(feature: &[f64], labels: &[usize]) -> Result<FeatureScore> {
    if feature.len() != labels.len() || feature.is_empty() {
        return Err(Error::InvalidInput(format!(
            "ANOVA needs equal-length non-empty inputs, got {} and {}",
            feature.len(),
            labels.len()
        )));
    }
    let k = n_label_classes(labels);
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&x, &c) in feature.iter().zip(labels) {
        sums[c] += x;
        counts[c] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidInput(format!("class {empty} has no samples")));
    }
    let n = feature.len();
    if k < 2 {
        return Err(Error::InvalidInput("ANOVA needs at least 2 groups".into()));
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let grand = feature.iter().sum::<f64>() / n as f64;

    let between: f64 = means
        .iter()
        .zip(&counts)
        .map(|(m, &c)| c as f64 * (m - grand).powi(2))
        .sum();
    let within: f64 = feature
        .iter()
        .zip(labels)
        .map(|(&x, &c)| (x - means[c]).powi(2))
        .sum();

    let statistic = if between == 0.0 {
        0.0
    } else if within == 0.0 {
        f64::MAX
    } else {
        // within > 0 implies some group has two samples, hence n > k
        (between / (k - 1) as f64) / (within / (n - k) as f64)
    };
    Ok(FeatureScore {
        feature_name: String::new(),
        statistic,
        method: ScoreMethod::AnovaF,
    })
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a[..n].iter().zip(&b[..n]) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Scores every feature of `d` against its labels.
pub fn score_features(
    d: &Dataset,
    method: ScoreMethod,
    n_bins: usize,
) -> Result<Vec<FeatureScore>> {
    (0..d.n_features())
        .map(|j| {
            let column = d.column(j);
            let mut s = match method {
                ScoreMethod::ChiSquared => chi_squared_score(&column, d.labels(), n_bins)?,
                ScoreMethod::AnovaF => anova_f_score(&column, d.labels())?,
            };
            s.feature_name = d.feature_names()[j].clone();
            Ok(s)
        })
        .collect()
}
