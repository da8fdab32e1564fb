//! CSV ingestion into a column-oriented feature matrix.
//!
//! Rows of the source file are data points; they are stored as the columns
//! of a `d × n` matrix. An optional label column is split off, either used
//! verbatim as class labels or binned into quartiles of a numeric target.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A column selected by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "#{i}"),
            ColumnRef::Name(name) => f.write_str(name),
        }
    }
}

impl From<&str> for ColumnRef {
    /// Plain integers select by position, anything else by header name.
    fn from(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        }
    }
}

/// How class labels are derived from the source file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSpec {
    /// Use the column's text as the label.
    Column(ColumnRef),
    /// Bin the numeric column into quartiles `Q1..Q4`.
    Quartile(ColumnRef),
    #[default]
    None,
}

impl LabelSpec {
    fn column(&self) -> Option<&ColumnRef> {
        match self {
            LabelSpec::Column(c) | LabelSpec::Quartile(c) => Some(c),
            LabelSpec::None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    feature_names: Vec<String>,
    labels: Option<Vec<String>>,
    point_ids: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a `d × n` matrix with points as columns.
    pub fn new(
        features: DMatrix<f64>,
        feature_names: Vec<String>,
        labels: Option<Vec<String>>,
        point_ids: Vec<String>,
    ) -> Result<Self> {
        let (d, n) = features.shape();
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: feature_names.len() });
        }
        if point_ids.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: point_ids.len() });
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: labels.len() });
            }
        }
        if let Some((idx, _)) = features.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            // column-major: idx = col * d + row
            return Err(Error::NonFinite { row: idx / d.max(1), column: idx % d.max(1) });
        }
        Ok(Dataset { features, feature_names, labels, point_ids })
    }

    /// Unlabeled dataset with generated feature names and point ids.
    pub fn from_matrix(features: DMatrix<f64>) -> Result<Self> {
        let (d, n) = features.shape();
        let names = (0..d).map(|i| format!("x{}", i + 1)).collect();
        let ids = (0..n).map(|i| i.to_string()).collect();
        Dataset::new(features, names, None, ids)
    }

    pub fn with_labels(self, labels: Option<Vec<String>>) -> Result<Self> {
        Dataset::new(self.features, self.feature_names, labels, self.point_ids)
    }

    /// `d × n` matrix, one column per point.
    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn point_ids(&self) -> &[String] {
        &self.point_ids
    }

    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> DVector<f64> {
        self.features.column(i).into_owned()
    }

    /// Distinct labels in order of first appearance.
    pub fn distinct_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for l in self.labels.iter().flatten() {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
        out
    }
}

/// Reads a comma-delimited file. See [`parse_csv`].
pub fn load_csv(path: impl AsRef<Path>, label_spec: &LabelSpec, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_csv(&bytes, label_spec, has_header)
}

/// Parses CSV bytes into a dataset. Every field outside the label column
/// must be a finite decimal number. Row and column numbers in errors are
/// one-based positions in the file.
pub fn parse_csv(bytes: &[u8], label_spec: &LabelSpec, has_header: bool) -> Result<Dataset> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(bytes);

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(rec);
    }
    let header = if has_header && !records.is_empty() { Some(records.remove(0)) } else { None };
    let width = match (&header, records.first()) {
        (Some(h), _) => h.len(),
        (None, Some(r)) => r.len(),
        (None, None) => return Err(Error::EmptyDataset),
    };
    let first_data_row = if header.is_some() { 2 } else { 1 };

    let label_col = match label_spec.column() {
        None => None,
        Some(ColumnRef::Index(i)) if *i < width => Some(*i),
        Some(ColumnRef::Name(name)) => {
            let pos = header.as_ref().and_then(|h| h.iter().position(|f| f == name));
            match pos {
                Some(p) => Some(p),
                None => return Err(Error::MissingColumn(name.clone())),
            }
        }
        Some(c) => return Err(Error::MissingColumn(c.to_string())),
    };

    let feature_cols: Vec<usize> = (0..width).filter(|c| Some(*c) != label_col).collect();
    if records.is_empty() || feature_cols.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let feature_names = feature_cols
        .iter()
        .map(|&c| match &header {
            Some(h) => h[c].to_string(),
            None => format!("x{}", c + 1),
        })
        .collect();

    let n = records.len();
    let d = feature_cols.len();
    let mut features = DMatrix::zeros(d, n);
    let mut raw_labels = Vec::with_capacity(if label_col.is_some() { n } else { 0 });
    for (j, rec) in records.iter().enumerate() {
        let row = j + first_data_row;
        if rec.len() != width {
            return Err(Error::Ragged { row, expected: width, found: rec.len() });
        }
        for (i, &c) in feature_cols.iter().enumerate() {
            let field = &rec[c];
            let v: f64 =
                field.parse().map_err(|_| Error::NonNumeric { row, column: c + 1, value: field.to_string() })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, column: c + 1 });
            }
            features[(i, j)] = v;
        }
        if let Some(c) = label_col {
            raw_labels.push((row, rec[c].to_string()));
        }
    }

    let labels = match label_spec {
        LabelSpec::None => None,
        LabelSpec::Column(_) => Some(raw_labels.into_iter().map(|(_, l)| l).collect()),
        LabelSpec::Quartile(_) => {
            let c = label_col.unwrap_or_default();
            let targets = raw_labels
                .iter()
                .map(|(row, field)| {
                    field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::NonNumeric {
                        row: *row,
                        column: c + 1,
                        value: field.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Some(quartile_bin(&targets)?)
        }
    };

    let ids = (0..n).map(|i| i.to_string()).collect();
    Dataset::new(features, feature_names, labels, ids)
}

/// Reads only the label column of a file, returning the raw numeric targets.
/// Used to inspect the target range of regression datasets.
pub fn load_targets(path: impl AsRef<Path>, column: &ColumnRef, has_header: bool) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let ds = parse_csv(&bytes, &LabelSpec::Column(column.clone()), has_header)?;
    ds.labels()
        .unwrap_or_default()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.parse::<f64>().map_err(|_| Error::NonNumeric {
                row: i + 1 + usize::from(has_header),
                column: 0,
                value: s.clone(),
            })
        })
        .collect()
}

/// Assigns `Q1..Q4` by the 25/50/75% points of the empirical distribution.
///
/// Boundaries are order statistics (the inverse empirical CDF), so the result
/// depends only on ranks. A value equal to a boundary goes to the lower
/// quartile.
pub fn quartile_bin(targets: &[f64]) -> Result<Vec<String>> {
    let n = targets.len();
    if n < 4 {
        return Err(Error::InvalidArgument(format!("quartile binning needs at least 4 targets, got {n}")));
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::NotFinite);
    }
    let mut sorted = targets.to_vec();
    sorted.sort_by(f64::total_cmp);
    let boundary = |p: usize| sorted[(p * n).div_ceil(4) - 1];
    let bounds = [boundary(1), boundary(2), boundary(3)];
    Ok(targets
        .iter()
        .map(|t| {
            let q = bounds.iter().position(|b| t <= b).unwrap_or(3);
            format!("Q{}", q + 1)
        })
        .collect())
}

/// Subtracts the feature-wise mean from every point.
pub fn center(ds: &Dataset) -> (Dataset, DVector<f64>) {
    let mean = feature_means(ds.features());
    let mut features = ds.features.clone();
    for mut col in features.column_iter_mut() {
        col -= &mean;
    }
    let centered = Dataset { features, ..ds.clone() };
    (centered, mean)
}

/// Divides each feature by its sample standard deviation. Constant
/// features are left unscaled.
pub fn standardize(ds: &Dataset) -> Dataset {
    let mean = feature_means(ds.features());
    let n = ds.len();
    let mut features = ds.features.clone();
    for (i, mut row) in features.row_iter_mut().enumerate() {
        let var = row.iter().map(|x| (x - mean[i]).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        let sd = var.sqrt();
        if sd > 0.0 {
            row.iter_mut().for_each(|x| *x /= sd);
        }
    }
    Dataset { features, ..ds.clone() }
}

fn feature_means(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.ncols().max(1) as f64;
    // two-pass mean keeps the centered rows closer to zero sum
    let mut mean = x.column_sum() / n;
    let mut correction = DVector::zeros(x.nrows());
    for col in x.column_iter() {
        correction += col - &mean;
    }
    mean += correction / n;
    mean
}
