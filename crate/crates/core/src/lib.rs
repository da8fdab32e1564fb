//! Andrews plots for tabular data.
//!
//! Two families of plots are supported. The classic family maps the PCA
//! scores of a point onto the trigonometric basis `1, √2cos(2πt), √2sin(2πt),
//! √2cos(4πt), …`, which minimizes the mean quadratic variation of the
//! curves. The smoothed family replaces the trigonometric basis with the
//! lowest eigenvectors of two Jacobi operators that additionally penalize
//! oscillation of the Fourier coefficients; those eigenvectors are computed
//! on truncated operators whose size is doubled until the eigenvalues settle.
//!
//! The pipeline is
//! [`dataset`] → [`pca`] → [`operator`] / [`andrews`] → [`render`], with
//! [`harmonic`] providing exact coefficient-space algebra on finite Fourier
//! series.

pub mod andrews;
pub mod dataset;
mod error;
pub mod harmonic;
pub mod operator;
pub mod pca;
pub mod render;
mod sign;

pub use andrews::{AndrewsBasis, BasisKind, ObjectiveSummary};
pub use dataset::{ColumnRef, Dataset, LabelSpec};
pub use error::{Error, Result};
pub use harmonic::HarmonicFunction;
pub use operator::{ConvergeOptions, ConvergenceReport, EigenPair, Parity, SpectralBasis, TridiagMatrix};
pub use pca::{DegeneracyWarning, PcaModel};
pub use render::{Band, CurveSet, PlotDocument, StyleOptions};
pub use sign::canonicalize_sign;
