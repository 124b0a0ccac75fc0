use crate::dataio::{pearson, FeatureScore};
use crate::{rng, Error, Result};

/// Dense row-major matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, n_rows: usize, n_cols: usize) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::InvalidInput(format!(
                "{} values cannot fill a {n_rows}x{n_cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            data,
            n_rows,
            n_cols,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                actual: r.len(),
            });
        }
        Self::new(rows.concat(), rows.len(), n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, col)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            data,
            n_rows: rows.len(),
            n_cols: self.n_cols,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.n_rows * cols.len());
        for r in 0..self.n_rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Matrix {
            data,
            n_rows: self.n_rows,
            n_cols: cols.len(),
        }
    }
}

/// Numeric features with integer class labels; no missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    n_classes: usize,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        n_classes: usize,
    ) -> Result<Self> {
        if labels.len() != features.n_rows() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} rows",
                labels.len(),
                features.n_rows()
            )));
        }
        if feature_names.len() != features.n_cols() {
            return Err(Error::InvalidInput(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.n_cols()
            )));
        }
        if n_classes < 2 {
            return Err(Error::InvalidInput(format!(
                "a dataset needs at least 2 classes, got {n_classes}"
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::ClassOutOfRange {
                class_id: bad,
                n_classes,
            });
        }
        if features.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("features must be finite".into()));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            n_classes,
        })
    }

    /// Dataset with generated feature names `f0, f1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let features = Matrix::from_rows(rows)?;
        let names = (0..features.n_cols()).map(|j| format!("f{j}")).collect();
        Self::new(features, labels, names, n_classes)
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.features.column(j)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            feature_names: self.feature_names.clone(),
            n_classes: self.n_classes,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_columns(cols),
            labels: self.labels.clone(),
            feature_names: cols
                .iter()
                .map(|&c| self.feature_names[c].clone())
                .collect(),
            n_classes: self.n_classes,
        }
    }
}

/// Drops the later column of every pair with `|r| >= threshold`.
///
/// The scan runs left to right; a dropped column is never compared again.
/// Pairs involving a constant column have no defined correlation and are
/// never pruned.
pub fn prune_correlated(d: &Dataset, threshold: f64) -> Result<Dataset> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "correlation threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let columns: Vec<Vec<f64>> = (0..d.n_features()).map(|j| d.column(j)).collect();
    let mut kept = vec![true; columns.len()];
    for i in 0..columns.len() {
        if !kept[i] {
            continue;
        }
        for j in i + 1..columns.len() {
            if kept[j] && pearson(&columns[i], &columns[j]).is_some_and(|r| r.abs() >= threshold) {
                log::warn!(
                    "dropping feature `{}`: correlated with `{}`",
                    d.feature_names[j],
                    d.feature_names[i]
                );
                kept[j] = false;
            }
        }
    }
    let cols: Vec<usize> = (0..columns.len()).filter(|&j| kept[j]).collect();
    Ok(d.select_columns(&cols))
}

/// Keeps the `top_k` highest-scoring features, in original column order.
///
/// Scores are matched to columns by feature name; equal statistics keep
/// the earlier column.
pub fn select_features(d: &Dataset, scores: &[FeatureScore], top_k: usize) -> Result<Dataset> {
    if top_k == 0 {
        return Err(Error::InvalidInput("top_k must be at least 1".into()));
    }
    let mut ranked: Vec<(usize, f64)> = Vec::with_capacity(d.n_features());
    for (j, name) in d.feature_names.iter().enumerate() {
        let score = scores
            .iter()
            .find(|s| &s.feature_name == name)
            .ok_or_else(|| Error::MissingColumn(format!("no score for feature `{name}`")))?;
        ranked.push((j, score.statistic));
    }
    if top_k > ranked.len() {
        log::warn!(
            "requested top {top_k} features but only {} exist; keeping all",
            ranked.len()
        );
    }
    // stable sort keeps column order among equal statistics
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut cols: Vec<usize> = ranked.iter().take(top_k).map(|&(j, _)| j).collect();
    cols.sort_unstable();
    Ok(d.select_columns(&cols))
}

/// Shuffles rows with `seed`, then cuts at `floor(train_fraction * n)`.
pub fn train_test_split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = d.n_rows();
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidInput(format!(
            "splitting {n} rows at {train_fraction} leaves an empty part"
        )));
    }
    let perm = rng::permutation(n, seed);
    Ok((
        d.select_rows(&perm[..n_train]),
        d.select_rows(&perm[n_train..]),
    ))
}

/// `min(n, rows)` rows drawn without replacement, kept in original order.
pub fn random_sample(d: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    if n >= d.n_rows() {
        return Ok(d.clone());
    }
    let idx = rng::sample_indices(&mut rng::seeded(seed), d.n_rows(), n);
    Ok(d.select_rows(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::ScoreMethod;
    use rand::RngCore;

    fn toy(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let labels = (0..n).map(|i| i % 2).collect();
        Dataset::from_rows(&rows, labels, 2).unwrap()
    }

    fn score(name: &str, statistic: f64) -> FeatureScore {
        FeatureScore {
            feature_name: name.into(),
            statistic,
            method: ScoreMethod::AnovaF,
        }
    }

    #[test]
    fn dataset_invariants_are_checked() {
        let m = Matrix::new(vec![1.0, 2.0], 2, 1).unwrap();
        assert!(Dataset::new(m.clone(), vec![0], vec!["a".into()], 2).is_err());
        assert!(Dataset::new(m.clone(), vec![0, 2], vec!["a".into()], 2).is_err());
        assert!(Dataset::new(m.clone(), vec![0, 0], vec!["a".into()], 1).is_err());
        assert!(Dataset::new(m, vec![0, 1], vec!["a".into()], 2).is_ok());
    }

    #[test]
    fn split_sizes_70_30() {
        let (train, test) = train_test_split(&toy(10), 0.7, 1).unwrap();
        assert_eq!((train.n_rows(), test.n_rows()), (7, 3));
    }

    #[test]
    fn split_is_deterministic() {
        let d = toy(50);
        assert_eq!(
            train_test_split(&d, 0.7, 9).unwrap(),
            train_test_split(&d, 0.7, 9).unwrap()
        );
    }

    #[test]
    fn split_matches_reference_permutation() {
        // Reference: Fisher-Yates from the back over ChaCha8 seeded with the
        // split seed, each index drawn by rejection on a 64-bit output.
        fn reference(n: usize, seed: u64) -> Vec<usize> {
            let mut g = rng::seeded(seed);
            let mut p: Vec<usize> = (0..n).collect();
            let mut i = n;
            while i > 1 {
                i -= 1;
                let m = (i + 1) as u64;
                let limit = u64::MAX - u64::MAX % m;
                let j = loop {
                    let x = g.next_u64();
                    if x < limit {
                        break (x % m) as usize;
                    }
                };
                p.swap(i, j);
            }
            p
        }
        let d = toy(100);
        let (train, test) = train_test_split(&d, 0.7, 2024).unwrap();
        let p = reference(100, 2024);
        let col0 = |ds: &Dataset| ds.column(0).iter().map(|&x| x as usize).collect::<Vec<_>>();
        assert_eq!(col0(&train), p[..70].to_vec());
        assert_eq!(col0(&test), p[70..].to_vec());
    }

    #[test]
    fn split_rejects_empty_parts() {
        let d = toy(2);
        assert!(train_test_split(&d, 0.3, 0).is_err());
        assert!(train_test_split(&d, 0.0, 0).is_err());
        assert!(train_test_split(&d, 1.0, 0).is_err());
        assert!(train_test_split(&d, 0.5, 0).is_ok());
    }

    #[test]
    fn sampling() {
        let d = toy(30);
        assert_eq!(random_sample(&d, 30, 1).unwrap(), d);
        assert_eq!(random_sample(&d, 1000, 1).unwrap(), d);
        let s = random_sample(&d, 10, 5).unwrap();
        assert_eq!(s.n_rows(), 10);
        assert_eq!(s, random_sample(&d, 10, 5).unwrap());
        let ids = s.column(0);
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
        assert!(random_sample(&d, 0, 1).is_err());
    }

    #[test]
    fn prune_identical_columns() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64]).collect();
        let d = Dataset::from_rows(&rows, (0..10).map(|i| i % 2).collect(), 2).unwrap();
        let p = prune_correlated(&d, 0.9).unwrap();
        assert_eq!(p.feature_names(), &["f0".to_string()]);
    }

    #[test]
    fn prune_keeps_uncorrelated() {
        // orthogonal centred patterns, r = 0 exactly
        let a = [1.0, -1.0, 1.0, -1.0];
        let b = [1.0, 1.0, -1.0, -1.0];
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![a[i], b[i]]).collect();
        let d = Dataset::from_rows(&rows, vec![0, 1, 0, 1], 2).unwrap();
        assert_eq!(prune_correlated(&d, 0.9).unwrap(), d);
    }

    #[test]
    fn prune_matches_all_pairs_oracle() {
        let mut g = rng::seeded(77);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let x = rng::unit(&mut g);
                let y = rng::unit(&mut g);
                vec![x, y, x]
            })
            .collect();
        let d = Dataset::from_rows(&rows, (0..40).map(|i| i % 2).collect(), 2).unwrap();

        // oracle: explicit all-pairs Pearson, written out longhand
        let cols: Vec<Vec<f64>> = (0..3).map(|j| d.column(j)).collect();
        let r = |a: &[f64], b: &[f64]| {
            let n = a.len() as f64;
            let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
            let mut sab = 0.0;
            let mut saa = 0.0;
            let mut sbb = 0.0;
            for k in 0..a.len() {
                sab += (a[k] - ma) * (b[k] - mb);
                saa += (a[k] - ma).powi(2);
                sbb += (b[k] - mb).powi(2);
            }
            sab / (saa * sbb).sqrt()
        };
        let mut drop = [false; 3];
        for i in 0..3 {
            for j in i + 1..3 {
                if !drop[i] && !drop[j] && r(&cols[i], &cols[j]).abs() >= 0.9 {
                    drop[j] = true;
                }
            }
        }
        assert_eq!(drop, [false, false, true]);
        assert_eq!(
            prune_correlated(&d, 0.9).unwrap().feature_names(),
            &["f0".to_string(), "f1".to_string()]
        );
    }

    #[test]
    fn prune_threshold_bounds() {
        assert!(prune_correlated(&toy(5), 0.0).is_err());
        assert!(prune_correlated(&toy(5), 1.5).is_err());
        assert!(prune_correlated(&toy(5), 1.0).is_ok());
    }

    #[test]
    fn select_top_k() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| vec![i as f64, 1.0 - i as f64, 2.0 * i as f64])
            .collect();
        let d = Dataset::from_rows(&rows, vec![0, 1, 0, 1], 2).unwrap();
        let scores = vec![score("f0", 5.0), score("f1", 1.0), score("f2", 3.0)];
        let s = select_features(&d, &scores, 2).unwrap();
        assert_eq!(s.feature_names(), &["f0".to_string(), "f2".to_string()]);
        assert_eq!(select_features(&d, &scores, 3).unwrap(), d);
        assert_eq!(select_features(&d, &scores, 10).unwrap(), d);
        assert!(select_features(&d, &scores, 0).is_err());
    }

    #[test]
    fn select_ties_follow_column_order() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64; 3]).collect();
        let d = Dataset::from_rows(&rows, vec![0, 1, 0, 1], 2).unwrap();
        let scores = vec![score("f0", 2.0), score("f1", 2.0), score("f2", 2.0)];
        // oracle: stable sort by descending statistic keeps index order
        let mut oracle: Vec<usize> = vec![0, 1, 2];
        oracle.sort_by(|a, b| {
            scores[*b]
                .statistic
                .partial_cmp(&scores[*a].statistic)
                .unwrap()
        });
        assert_eq!(oracle[0], 0);
        let s = select_features(&d, &scores, 1).unwrap();
        assert_eq!(s.feature_names(), &["f0".to_string()]);
    }
}
