use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("non-numeric value {value:?} at row {row}, column {column}")]
    NonNumeric { row: usize, column: usize, value: String },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("no such column: {0}")]
    MissingColumn(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("input contains NaN or infinite values")]
    NotFinite,
    #[error("eigensolver did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },
    #[error("eigenvalues not converged at N = {n_final} (last delta {max_last_delta:e})")]
    NotConverged { n_final: usize, max_last_delta: f64 },
    #[error("merged spectrum is degenerate: gap {gap:e} between eigenvalues {index} and {}", index + 1)]
    DegenerateSpectrum { index: usize, gap: f64 },
    #[error("tail bound not applicable: {0}")]
    TailBoundNotApplicable(String),
}
