//! Tabular ingest and preparation.
//!
//! A CSV file becomes a [`RawTable`]; cleaning passes remove duplicates,
//! rows without a label and missing cells; [`encode`] turns the clean table
//! into a numeric [`Dataset`], which the remaining operations prune, score,
//! subsample and split.

mod dataset;
mod stats;
mod table;

pub use dataset::{
    prune_correlated, random_sample, select_features, train_test_split, Dataset, Matrix,
};
pub use stats::{
    anova_f_score, chi_squared_score, pearson, score_features, FeatureScore, ScoreMethod,
    DEFAULT_CHI2_BINS,
};
pub use table::{
    drop_duplicates, drop_missing_labels, encode, impute_missing, load_csv, Column, RawTable,
};
