use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::Path;

use crate::dataio::{Dataset, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            Column::Numeric(v) => v[row].is_none(),
            Column::Categorical(v) => v[row].is_none(),
        }
    }

    pub fn missing_count(&self) -> usize {
        (0..self.len()).filter(|&r| self.is_missing(r)).count()
    }

    fn take_rows(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical(v) => {
                Column::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
        }
    }
}

/// Untyped table straight from a CSV file, missing cells included.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    column_names: Vec<String>,
    columns: Vec<Column>,
    n_rows: usize,
    dropped_columns: Vec<String>,
}

impl RawTable {
    pub fn new(column_names: Vec<String>, columns: Vec<Column>) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::InvalidInput(format!(
                "{} column names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate column name `{name}`"
                )));
            }
        }
        let n_rows = columns.first().map_or(0, Column::len);
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n_rows) {
            return Err(Error::InvalidInput(format!(
                "column `{}` has {} rows, expected {n_rows}",
                column_names[i],
                c.len()
            )));
        }
        Ok(Self {
            column_names,
            columns,
            n_rows,
            dropped_columns: Vec::new(),
        })
    }

    /// Parses CSV text: header row first, empty cell means missing.
    pub fn from_reader<R: Read>(reader: R, label_column: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(Error::Parse {
                line: 1,
                message: "missing header row".into(),
            });
        }
        if !header.iter().any(|h| h == label_column) {
            return Err(Error::MissingColumn(label_column.to_string()));
        }

        let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); header.len()];
        for (row_idx, record) in rdr.records().enumerate() {
            let line = row_idx + 2;
            let record = record.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if record.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "data row {row_idx} has {} cells, header has {}",
                        record.len(),
                        header.len()
                    ),
                });
            }
            for (col, cell) in record.iter().enumerate() {
                let cell = cell.trim();
                cells[col].push((!cell.is_empty()).then(|| cell.to_string()));
            }
        }

        let columns = cells.into_iter().map(classify_column).collect();
        Self::new(header, columns)
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Columns removed by [`impute_missing`] because every cell was missing.
    pub fn dropped_columns(&self) -> &[String] {
        &self.dropped_columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.column_index(name).map(|i| &self.columns[i])
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().map(Column::missing_count).sum()
    }

    /// Removes the named columns; unknown names are ignored.
    pub fn without_columns(&self, names: &[String]) -> RawTable {
        let mut out = self.clone();
        let keep: Vec<bool> = out
            .column_names
            .iter()
            .map(|n| !names.contains(n))
            .collect();
        let mut k = keep.iter();
        out.column_names.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        out.columns.retain(|_| *k.next().unwrap());
        out
    }

    fn take_rows(&self, rows: &[usize]) -> RawTable {
        RawTable {
            column_names: self.column_names.clone(),
            columns: self.columns.iter().map(|c| c.take_rows(rows)).collect(),
            n_rows: rows.len(),
            dropped_columns: self.dropped_columns.clone(),
        }
    }
}

fn classify_column(cells: Vec<Option<String>>) -> Column {
    let parsed: Option<Vec<Option<f64>>> = cells
        .iter()
        .map(|c| match c {
            None => Some(None),
            Some(s) => s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some),
        })
        .collect();
    match parsed {
        Some(values) => Column::Numeric(values),
        None => Column::Categorical(cells),
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    RawTable::from_reader(std::io::BufReader::new(file), label_column)
}

#[derive(Hash, PartialEq, Eq)]
enum CellKey<'a> {
    Missing,
    Num(u64),
    Cat(&'a str),
}

fn cell_key(col: &Column, row: usize) -> CellKey<'_> {
    match col {
        Column::Numeric(v) => match v[row] {
            // +0.0 and -0.0 compare equal
            Some(x) => CellKey::Num(if x == 0.0 { 0 } else { x.to_bits() }),
            None => CellKey::Missing,
        },
        Column::Categorical(v) => match &v[row] {
            Some(s) => CellKey::Cat(s),
            None => CellKey::Missing,
        },
    }
}

/// Keeps the first occurrence of every distinct row, preserving order.
pub fn drop_duplicates(t: &RawTable) -> RawTable {
    let mut seen = HashSet::with_capacity(t.n_rows);
    let keep: Vec<usize> = (0..t.n_rows)
        .filter(|&r| {
            let key: Vec<CellKey<'_>> = t.columns.iter().map(|c| cell_key(c, r)).collect();
            seen.insert(key)
        })
        .collect();
    t.take_rows(&keep)
}

pub fn drop_missing_labels(t: &RawTable, label_column: &str) -> Result<RawTable> {
    let col = t
        .column(label_column)
        .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
    let keep: Vec<usize> = (0..t.n_rows).filter(|&r| !col.is_missing(r)).collect();
    Ok(t.take_rows(&keep))
}

/// Fills numeric gaps with the column mean and categorical gaps with the
/// column mode (lexicographically smallest on ties). Columns with no
/// observed value are dropped and listed in `dropped_columns`.
pub fn impute_missing(t: &RawTable) -> RawTable {
    let mut names = Vec::with_capacity(t.columns.len());
    let mut columns = Vec::with_capacity(t.columns.len());
    let mut dropped = t.dropped_columns.clone();

    for (name, col) in t.column_names.iter().zip(&t.columns) {
        let filled = match col {
            Column::Numeric(v) => {
                let observed: Vec<f64> = v.iter().flatten().copied().collect();
                if observed.is_empty() && t.n_rows > 0 {
                    None
                } else {
                    let mean = observed.iter().sum::<f64>() / observed.len().max(1) as f64;
                    Some(Column::Numeric(
                        v.iter().map(|x| Some(x.unwrap_or(mean))).collect(),
                    ))
                }
            }
            Column::Categorical(v) => {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                for s in v.iter().flatten() {
                    *counts.entry(s.as_str()).or_default() += 1;
                }
                // BTreeMap iterates in lexicographic order, so `>` keeps the
                // smallest value among equally frequent ones.
                let mut mode: Option<(&str, usize)> = None;
                for (value, count) in counts {
                    if mode.is_none_or(|(_, best)| count > best) {
                        mode = Some((value, count));
                    }
                }
                match mode {
                    None if t.n_rows > 0 => None,
                    mode => {
                        let fill = mode.map(|(m, _)| m.to_string()).unwrap_or_default();
                        Some(Column::Categorical(
                            v.iter()
                                .map(|x| Some(x.clone().unwrap_or_else(|| fill.clone())))
                                .collect(),
                        ))
                    }
                }
            }
        };
        match filled {
            Some(c) => {
                names.push(name.clone());
                columns.push(c);
            }
            None => {
                log::warn!("dropping column `{name}`: every value is missing");
                dropped.push(name.clone());
            }
        }
    }

    RawTable {
        column_names: names,
        columns,
        n_rows: t.n_rows,
        dropped_columns: dropped,
    }
}

/// Sorted distinct values of a complete column, and each cell's rank.
fn ordinal_codes(col: &Column) -> (usize, Vec<usize>) {
    match col {
        Column::Numeric(v) => {
            let values: Vec<f64> = v.iter().map(|x| x.expect("complete column")).collect();
            let mut uniq = values.clone();
            uniq.sort_by(f64::total_cmp);
            uniq.dedup_by(|a, b| a.total_cmp(b) == Ordering::Equal);
            let codes = values
                .iter()
                .map(|x| uniq.binary_search_by(|u| u.total_cmp(x)).unwrap())
                .collect();
            (uniq.len(), codes)
        }
        Column::Categorical(v) => {
            let values: Vec<&str> = v
                .iter()
                .map(|x| x.as_deref().expect("complete column"))
                .collect();
            let mut uniq = values.clone();
            uniq.sort_unstable();
            uniq.dedup();
            let codes = values
                .iter()
                .map(|x| uniq.binary_search(x).unwrap())
                .collect();
            (uniq.len(), codes)
        }
    }
}

/// Converts a complete table into a numeric [`Dataset`].
///
/// Categorical features and the label become ordinal codes in sorted order
/// of their distinct values; numeric features pass through unchanged.
pub fn encode(t: &RawTable, label_column: &str) -> Result<Dataset> {
    let label_idx = t
        .column_index(label_column)
        .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
    if let Some((name, _)) = t
        .column_names
        .iter()
        .zip(&t.columns)
        .find(|(_, c)| c.missing_count() > 0)
    {
        return Err(Error::InvalidInput(format!(
            "column `{name}` still has missing values; impute before encoding"
        )));
    }

    let (n_classes, labels) = ordinal_codes(&t.columns[label_idx]);
    if n_classes < 2 {
        return Err(Error::ConstantLabel(label_column.to_string()));
    }

    let feature_cols: Vec<usize> = (0..t.columns.len()).filter(|&i| i != label_idx).collect();
    let encoded: Vec<Vec<f64>> = feature_cols
        .iter()
        .map(|&i| match &t.columns[i] {
            Column::Numeric(v) => v.iter().map(|x| x.unwrap()).collect(),
            c @ Column::Categorical(_) => {
                ordinal_codes(c).1.into_iter().map(|c| c as f64).collect()
            }
        })
        .collect();

    let n_features = feature_cols.len();
    let mut data = Vec::with_capacity(t.n_rows * n_features);
    for r in 0..t.n_rows {
        data.extend(encoded.iter().map(|col| col[r]));
    }
    let names = feature_cols
        .iter()
        .map(|&i| t.column_names[i].clone())
        .collect();
    Dataset::new(
        Matrix::new(data, t.n_rows, n_features)?,
        labels,
        names,
        n_classes,
    )
}
