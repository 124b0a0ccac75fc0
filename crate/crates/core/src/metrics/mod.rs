//! Classification metrics and the serial-vs-parallel benchmark report.

mod report;

pub use report::{
    build_report, plot_tables, render_text, BenchmarkReport, ConfigSummary, DatasetFingerprint,
    Equivalence, ModeRun, ModeSummary, ReportMeta, SCHEMA_VERSION,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Class counted as positive unless configured otherwise.
pub const DEFAULT_POSITIVE_CLASS: usize = 1;

/// `counts[t * n_classes + p]` holds samples of true class `t` predicted `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self> {
        let n_classes = rows.len();
        if rows.iter().any(|r| r.len() != n_classes) {
            return Err(Error::InvalidInput(
                "confusion matrix must be square".into(),
            ));
        }
        Ok(Self {
            n_classes,
            counts: rows.concat(),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, true_class: usize, predicted: usize) -> u64 {
        self.counts[true_class * self.n_classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }

    /// Row-major counts as nested vectors.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts
            .chunks(self.n_classes.max(1))
            .map(<[u64]>::to_vec)
            .collect()
    }

    /// Counts with the roles of truth and prediction swapped.
    pub fn transposed(&self) -> Self {
        let n = self.n_classes;
        let mut counts = vec![0; n * n];
        for t in 0..n {
            for p in 0..n {
                counts[p * n + t] = self.get(t, p);
            }
        }
        Self {
            n_classes: n,
            counts,
        }
    }

    fn predicted_as(&self, class_id: usize) -> u64 {
        (0..self.n_classes).map(|t| self.get(t, class_id)).sum()
    }

    fn actually(&self, class_id: usize) -> u64 {
        (0..self.n_classes).map(|p| self.get(class_id, p)).sum()
    }
}

pub fn confusion(
    truth: &[usize],
    predicted: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::InvalidInput(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidInput("no samples to score".into()));
    }
    let mut counts = vec![0u64; n_classes * n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        for class_id in [t, p] {
            if class_id >= n_classes {
                return Err(Error::ClassOutOfRange {
                    class_id,
                    n_classes,
                });
            }
        }
        counts[t * n_classes + p] += 1;
    }
    Ok(ConfusionMatrix { n_classes, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Scores of `positive_class` alone.
    Binary,
    /// Unweighted mean of per-class precision and recall.
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub positive_class: usize,
    pub averaging: Averaging,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn ratio(num: u64, den: u64, what: &str, warnings: &mut Vec<String>) -> f64 {
    if den == 0 {
        warnings.push(format!("{what} is 0/0, reported as 0"));
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64, what: &str, warnings: &mut Vec<String>) -> f64 {
    if p + r == 0.0 {
        warnings.push(format!("{what} is 0/0, reported as 0"));
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Binary scores for `positive_class` on two classes; macro-averaged
/// precision and recall otherwise, with F1 their harmonic mean.
pub fn metric_set(cm: &ConfusionMatrix, positive_class: usize) -> MetricSet {
    let mut warnings = Vec::new();
    let accuracy = ratio(cm.trace(), cm.total(), "accuracy", &mut warnings);
    let n = cm.n_classes();
    let (precision, recall, averaging) = if n <= 2 {
        if positive_class >= n {
            warnings.push(format!(
                "positive class {positive_class} not among {n} classes"
            ));
            (0.0, 0.0, Averaging::Binary)
        } else {
            let tp = cm.get(positive_class, positive_class);
            let p = ratio(
                tp,
                cm.predicted_as(positive_class),
                "precision",
                &mut warnings,
            );
            let r = ratio(tp, cm.actually(positive_class), "recall", &mut warnings);
            (p, r, Averaging::Binary)
        }
    } else {
        let (mut p_sum, mut r_sum) = (0.0, 0.0);
        for c in 0..n {
            let tp = cm.get(c, c);
            p_sum += ratio(
                tp,
                cm.predicted_as(c),
                &format!("precision of class {c}"),
                &mut warnings,
            );
            r_sum += ratio(
                tp,
                cm.actually(c),
                &format!("recall of class {c}"),
                &mut warnings,
            );
        }
        (p_sum / n as f64, r_sum / n as f64, Averaging::Macro)
    };
    let f1 = harmonic(precision, recall, "f1", &mut warnings);
    MetricSet {
        accuracy,
        precision,
        recall,
        f1,
        positive_class,
        averaging,
        warnings,
    }
}

/// Shorthand for `metric_set(confusion(..))`.
pub fn score(
    truth: &[usize],
    predicted: &[usize],
    n_classes: usize,
    positive_class: usize,
) -> Result<MetricSet> {
    Ok(metric_set(
        &confusion(truth, predicted, n_classes)?,
        positive_class,
    ))
}
