use std::io::Write;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use crate::rng;
use crate::{Error, Result};

/// Gaussian class blobs with unit variance.
///
/// Class `c` is centred at `separation * c * (1, ..., 1) / sqrt(n_features)`,
/// so neighbouring centroids sit exactly `separation` apart. Row `i` has
/// class `i % n_classes`.
pub fn generate_synthetic(
    n_rows: usize,
    n_features: usize,
    n_classes: usize,
    separation: f64,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    if n_classes < 2 || n_rows < n_classes {
        return Err(Error::InvalidInput(format!(
            "need n_rows >= n_classes >= 2, got {n_rows} rows and {n_classes} classes"
        )));
    }
    if n_features == 0 {
        return Err(Error::InvalidInput("need at least one feature".into()));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(Error::InvalidInput(format!(
            "separation must be >= 0, got {separation}"
        )));
    }
    let mut g = rng::seeded(seed);
    let step = separation / (n_features as f64).sqrt();
    let mut rows = Vec::with_capacity(n_rows);
    let mut labels = Vec::with_capacity(n_rows);
    for i in 0..n_rows {
        let class_id = i % n_classes;
        let offset = step * class_id as f64;
        rows.push(
            (0..n_features)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut g);
                    offset + z
                })
                .collect(),
        );
        labels.push(class_id);
    }
    Ok((rows, labels))
}

/// Writes rows as CSV with columns `f0..f{d-1}` then `label_column`.
pub fn write_synthetic_csv<W: Write>(
    out: W,
    rows: &[Vec<f64>],
    labels: &[usize],
    label_column: &str,
) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.into());
    let mut w = csv::Writer::from_writer(out);
    let d = rows.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
    header.push(label_column.to_string());
    w.write_record(&header).map_err(io)?;
    for (row, label) in rows.iter().zip(labels) {
        let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
        rec.push(label.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_synthetic_file(
    path: &Path,
    n_rows: usize,
    n_features: usize,
    n_classes: usize,
    separation: f64,
    seed: u64,
    label_column: &str,
) -> Result<()> {
    let (rows, labels) = generate_synthetic(n_rows, n_features, n_classes, separation, seed)?;
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_synthetic_csv(file, &rows, &labels, label_column)
}
