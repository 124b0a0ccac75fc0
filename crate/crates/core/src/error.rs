use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("label column `{0}` holds a single class; classification is undefined")]
    ConstantLabel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid hyperparameter: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected} feature columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("config {config_id}: prediction vector has length {actual}, expected {expected}")]
    LengthMismatch {
        config_id: usize,
        expected: usize,
        actual: usize,
    },

    #[error("class id {class_id} out of range for {n_classes} classes")]
    ClassOutOfRange { class_id: usize, n_classes: usize },

    #[error("task for config {config_id} failed: {message}")]
    TaskFailed { config_id: usize, message: String },

    #[error("serial and parallel runs do not cover the same plan: {0}")]
    PlanMismatch(String),

    #[error("serial and parallel predictions differ: {0}")]
    EquivalenceViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
