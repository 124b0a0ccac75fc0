//! Parallel hyperparameter sweeps with majority-vote ensembling.
//!
//! The crate trains many configurations of one classifier (KNN, SVM,
//! decision tree or random forest) either serially or on a worker pool,
//! combines the per-configuration predictions by plurality vote and reports
//! wall time, speedup and classification quality for both execution modes.
//!
//! Pipeline, module by module:
//!
//! * [`dataio`]: CSV ingest, cleaning, encoding, feature scoring and splits.
//! * [`classifiers`]: from-scratch learners behind one fit/predict contract.
//! * [`executor`]: striped task planning and serial/parallel execution.
//! * [`ensemble`]: plurality vote over per-configuration predictions.
//! * [`metrics`]: confusion matrices, metric sets and the benchmark report.
//! * [`cli`]: configuration, the end-to-end experiment driver and synthetic data.

pub mod classifiers;
pub mod cli;
pub mod dataio;
pub mod ensemble;
mod error;
pub mod executor;
pub mod metrics;
pub mod rng;
pub mod vote;

pub use error::{Error, Result};
