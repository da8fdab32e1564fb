//! Thin SVD of the feature matrix with deterministic sign canonicalization.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::sign::canonicalize_sign;

/// Default relative gap below which adjacent singular values are reported.
pub const DEFAULT_REL_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    mean: DVector<f64>,
    n_points: usize,
}

/// A pair of singular values too close for the minimizer to be unique.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyWarning {
    /// One-based index `k` of the pair `(σ_k, σ_{k+1})`; for a vanishing
    /// trailing singular value this is `d` and `next` is `None`.
    pub index: usize,
    pub next: Option<usize>,
    pub rel_gap: f64,
}

impl std::fmt::Display for DegeneracyWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.next {
            Some(next) => write!(
                f,
                "singular values {} and {} are nearly equal (relative gap {:e}); the optimal plot is not unique",
                self.index, next, self.rel_gap
            ),
            None => write!(
                f,
                "singular value {} is nearly zero (relative size {:e}); the optimal plot is not unique",
                self.index, self.rel_gap
            ),
        }
    }
}

impl PcaModel {
    /// Fits left singular vectors and singular values of the (optionally
    /// centered) data matrix. Each `u_i` is signed so its largest-magnitude
    /// entry is positive.
    pub fn fit(ds: &Dataset, center: bool) -> Result<Self> {
        let (d, n) = (ds.dim(), ds.len());
        if d == 0 || n == 0 {
            return Err(Error::EmptyDataset);
        }
        let (x, mean) = if center {
            let (c, mean) = dataset::center(ds);
            (c.features().clone(), mean)
        } else {
            (ds.features().clone(), DVector::zeros(d))
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotFinite);
        }
        let (u, sigma) = left_singular(&x)?;
        Ok(PcaModel { u, sigma, mean, n_points: n })
    }

    /// Builds a model from explicit parts. `u` must be square with orthonormal
    /// columns and `sigma` non-increasing and nonnegative.
    pub fn from_parts(u: DMatrix<f64>, sigma: DVector<f64>, mean: DVector<f64>, n_points: usize) -> Result<Self> {
        let d = u.nrows();
        if u.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: u.ncols() });
        }
        for len in [sigma.len(), mean.len()] {
            if len != d {
                return Err(Error::DimensionMismatch { expected: d, found: len });
            }
        }
        if sigma.iter().any(|s| *s < 0.0) || sigma.as_slice().windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("singular values must be nonnegative and non-increasing".into()));
        }
        if n_points == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(PcaModel { u, sigma, mean, n_points })
    }

    /// Columns are `u_1..u_d`.
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// PCA scores `Uᵀ(x − mean)`.
    pub fn scores(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let centered = DVector::from_column_slice(x) - &self.mean;
        Ok(self.u.tr_mul(&centered))
    }

    /// Flags adjacent singular values whose gap relative to `σ_1` is below
    /// `rel_gap_tol`, and a trailing singular value that is itself below it.
    pub fn degeneracy_report(&self, rel_gap_tol: f64) -> Vec<DegeneracyWarning> {
        let s = self.sigma.as_slice();
        let d = s.len();
        let top = s.first().copied().unwrap_or(0.0);
        let rel = |x: f64| if top > 0.0 { x / top } else { 0.0 };
        let mut out: Vec<DegeneracyWarning> = s
            .windows(2)
            .enumerate()
            .filter_map(|(k, w)| {
                let gap = rel(w[0] - w[1]);
                (gap < rel_gap_tol).then_some(DegeneracyWarning { index: k + 1, next: Some(k + 2), rel_gap: gap })
            })
            .collect();
        if d > 0 {
            let last = rel(s[d - 1]);
            if last < rel_gap_tol {
                out.push(DegeneracyWarning { index: d, next: None, rel_gap: last });
            }
        }
        out
    }
}

/// Full `d × d` left singular basis and the `d` singular values, descending.
/// When `n < d` the matrix is padded with zero columns so the trailing
/// singular values come out as exact zeros with a completed basis.
fn left_singular(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (d, n) = x.shape();
    let padded;
    let x = if n < d {
        padded = x.clone().resize_horizontally(d, 0.0);
        &padded
    } else {
        x
    };
    let svd = x.clone().svd(true, false);
    let u_thin = svd.u.ok_or(Error::NoConvergence { index: 0 })?;
    let sv = svd.singular_values;
    if sv.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotFinite);
    }
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let mut u = DMatrix::zeros(d, d);
    let mut sigma = DVector::zeros(d);
    for (k, &src) in order.iter().take(d).enumerate() {
        let mut col: Vec<f64> = u_thin.column(src).iter().copied().collect();
        canonicalize_sign(&mut col);
        u.set_column(k, &DVector::from_vec(col));
        sigma[k] = sv[src];
    }
    Ok((u, sigma))
}
