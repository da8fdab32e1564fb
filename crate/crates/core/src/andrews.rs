//! Optimal isometries from `ℝ^d` into `L²([0,1])` and their objectives.
//!
//! A plot is `f_x = Σ_i (u_iᵀ(x − mean)) φ_i` where the `u_i` come from the
//! PCA model (singular values descending) and the `φ_i` from an
//! [`AndrewsBasis`] (eigenvalues ascending). Pairing the largest singular
//! value with the smallest eigenvalue is what makes the plot attain the
//! lower bound `Σ λ_i σ_i²`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{from_even_odd, HarmonicFunction};
use crate::operator::{self, ConvergeOptions, ConvergenceReport, Parity, SpectralBasis};
use crate::pca::{PcaModel, DEFAULT_REL_GAP_TOL};

/// Eigenvalues of equal parity closer than this are treated as degenerate.
pub const MIN_SPECTRAL_GAP: f64 = 1e-12;

/// Cross-parity eigenvalue gaps below this are reported as warnings.
pub const PARITY_GAP_WARN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BasisKind {
    /// Trigonometric basis, possibly rotated within each harmonic pair.
    Classic,
    /// Lowest eigenvectors of the truncated even/odd Jacobi operators.
    Ssqv { alpha: f64, eigenvalues: Vec<f64>, parities: Vec<Parity>, report: ConvergenceReport },
    /// Any other orthonormal family.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AndrewsBasis {
    functions: Vec<HarmonicFunction>,
    kind: BasisKind,
}

/// Objective value of a plot against its lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveSummary {
    pub value: f64,
    pub lower_bound: f64,
    /// `(value − bound)/|bound|`, or the absolute gap when the bound is zero.
    pub rel_gap: f64,
    pub warnings: Vec<String>,
}

impl ObjectiveSummary {
    fn new(value: f64, lower_bound: f64, warnings: Vec<String>) -> Self {
        let gap = value - lower_bound;
        let rel_gap = if lower_bound != 0.0 { gap / lower_bound.abs() } else { gap };
        ObjectiveSummary { value, lower_bound, rel_gap, warnings }
    }
}

/// Which quadratic functional a mean objective averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `‖f′‖²`.
    Mqv,
    /// `(α/4π²)‖f′‖² + Σ|f̂[k+1] − f̂[k]|²`.
    Ssqv(f64),
}

impl Functional {
    fn pair(self, f: &HarmonicFunction, g: &HarmonicFunction) -> Result<f64> {
        match self {
            Functional::Mqv => Ok(f.mqv_pair(g)),
            Functional::Ssqv(alpha) => f.ssqv_pair(g, alpha),
        }
    }
}

impl AndrewsBasis {
    /// `1, √2cos(2πt), √2sin(2πt), √2cos(4πt), √2sin(4πt), …` truncated to `d`
    /// functions.
    pub fn classic(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("basis dimension must be at least 1".into()));
        }
        let functions = (0..d)
            .map(|i| match i {
                0 => HarmonicFunction::constant(1.0),
                i if i % 2 == 1 => HarmonicFunction::cosine(i.div_ceil(2)),
                i => HarmonicFunction::sine(i / 2),
            })
            .collect();
        Ok(AndrewsBasis { functions, kind: BasisKind::Classic })
    }

    /// Smoothed basis for `alpha`, converged to `tol` with the default
    /// truncation schedule.
    pub fn ssqv(d: usize, alpha: f64, tol: f64) -> Result<Self> {
        Self::ssqv_with(d, alpha, &ConvergeOptions::for_dim(d).with_tol(tol))
    }

    pub fn ssqv_with(d: usize, alpha: f64, opts: &ConvergeOptions) -> Result<Self> {
        let spectrum = operator::converge(alpha, d, opts)?;
        Self::from_spectrum(&spectrum)
    }

    /// Maps converged eigenvectors to functions: even vectors become cosine
    /// series (with constant term), odd vectors sine series.
    pub fn from_spectrum(spectrum: &SpectralBasis) -> Result<Self> {
        let report = &spectrum.report;
        if !report.converged {
            return Err(Error::NotConverged {
                n_final: report.n_final,
                max_last_delta: report.max_last_delta.unwrap_or(f64::NAN),
            });
        }
        // opposite-parity eigenvectors stay orthogonal at a tie, so only
        // equal-parity coincidences make the basis ill-defined
        if let Some((index, gap)) = spectrum.min_same_parity_gap() {
            if gap <= MIN_SPECTRAL_GAP {
                return Err(Error::DegenerateSpectrum { index: index + 1, gap });
            }
        }
        let functions = spectrum
            .pairs
            .iter()
            .map(|p| match p.parity {
                Some(Parity::Odd) => from_even_odd(&[], &p.vector),
                _ => from_even_odd(&p.vector, &[]),
            })
            .collect();
        Ok(AndrewsBasis {
            functions,
            kind: BasisKind::Ssqv {
                alpha: spectrum.alpha,
                eigenvalues: spectrum.values(),
                parities: spectrum.pairs.iter().map(|p| p.parity.unwrap_or(Parity::Even)).collect(),
                report: report.clone(),
            },
        })
    }

    /// Wraps an arbitrary family of functions. Orthonormality is not
    /// enforced; see [`gram_deviation`](Self::gram_deviation).
    pub fn custom(functions: Vec<HarmonicFunction>) -> Self {
        AndrewsBasis { functions, kind: BasisKind::Custom }
    }

    pub fn functions(&self) -> &[HarmonicFunction] {
        &self.functions
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    pub fn alpha(&self) -> Option<f64> {
        match &self.kind {
            BasisKind::Ssqv { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        match &self.kind {
            BasisKind::Ssqv { eigenvalues, .. } => eigenvalues,
            _ => &[],
        }
    }

    pub fn report(&self) -> Option<&ConvergenceReport> {
        match &self.kind {
            BasisKind::Ssqv { report, .. } => Some(report),
            _ => None,
        }
    }

    /// `G_ij = ⟨φ_i, φ_j⟩`.
    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.functions[i].inner_product(&self.functions[j]))
    }

    /// `‖G − I‖_max`.
    pub fn gram_deviation(&self) -> f64 {
        let d = self.dim();
        (self.gram() - DMatrix::identity(d, d)).amax()
    }

    /// The plot of `x`: `Σ_i score_i · φ_i`.
    pub fn embed(&self, model: &PcaModel, x: &[f64]) -> Result<HarmonicFunction> {
        self.check_dim(model)?;
        let scores = model.scores(x)?;
        Ok(HarmonicFunction::combine(scores.iter().copied().zip(&self.functions)))
    }

    /// Rotates `(φ_{2j}, φ_{2j+1})` (one-based) by `theta` within their
    /// harmonic plane. Only defined for classic bases, whose optimal set is
    /// closed under these rotations.
    pub fn rotate_pair(&self, j: usize, theta: f64) -> Result<Self> {
        if self.kind != BasisKind::Classic {
            return Err(Error::InvalidArgument("pair rotations apply to classic bases only".into()));
        }
        if j == 0 || 2 * j + 1 > self.dim() {
            return Err(Error::InvalidArgument(format!(
                "harmonic pair {j} out of range for a basis of {} functions",
                self.dim()
            )));
        }
        let (a, b) = (&self.functions[2 * j - 1], &self.functions[2 * j]);
        let (s, c) = theta.sin_cos();
        let ra = HarmonicFunction::combine([(c, a), (s, b)]);
        let rb = HarmonicFunction::combine([(-s, a), (c, b)]);
        let mut functions = self.functions.clone();
        functions[2 * j - 1] = ra;
        functions[2 * j] = rb;
        Ok(AndrewsBasis { functions, kind: BasisKind::Classic })
    }

    /// Pairs of adjacent eigenvalues with opposite parity that are closer
    /// than [`PARITY_GAP_WARN`]. Empty for non-smoothed bases.
    pub fn spectral_warnings(&self) -> Vec<String> {
        let BasisKind::Ssqv { eigenvalues, parities, .. } = &self.kind else {
            return Vec::new();
        };
        (1..eigenvalues.len())
            .filter(|&k| parities[k] != parities[k - 1])
            .filter_map(|k| {
                let gap = eigenvalues[k] - eigenvalues[k - 1];
                (gap < PARITY_GAP_WARN)
                    .then(|| format!("eigenvalues {k} and {} of opposite parity differ by only {gap:e}", k + 1))
            })
            .collect()
    }

    fn check_dim(&self, model: &PcaModel) -> Result<()> {
        if self.dim() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: self.dim() });
        }
        Ok(())
    }
}

/// `(1/n) Σ_{j,k} C_jk ⟨A φ_j, φ_k⟩`, the mean of a quadratic functional over
/// a dataset whose score second-moment matrix is `C = Σ_i s_i s_iᵀ`.
pub fn mean_objective(
    basis: &AndrewsBasis,
    score_moment: &DMatrix<f64>,
    n: usize,
    functional: Functional,
) -> Result<f64> {
    let d = basis.dim();
    if score_moment.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: score_moment.nrows() });
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let f = basis.functions();
    let mut total = 0.0;
    for j in 0..d {
        total += score_moment[(j, j)] * functional.pair(&f[j], &f[j])?;
        for k in j + 1..d {
            let c = score_moment[(j, k)] + score_moment[(k, j)];
            if c != 0.0 {
                total += c * functional.pair(&f[j], &f[k])?;
            }
        }
    }
    Ok(total / n as f64)
}

/// Score second moments of a fitted model, `UᵀXXᵀU = diag(σ²)`.
pub fn model_moment(model: &PcaModel) -> DMatrix<f64> {
    DMatrix::from_diagonal(&model.sigma().map(|s| s * s))
}

/// `Σ λ_i σ_i²` for ascending `λ` and descending `σ`.
pub fn spectral_lower_bound(lambdas: &[f64], sigmas: &[f64]) -> Result<f64> {
    if lambdas.len() != sigmas.len() {
        return Err(Error::DimensionMismatch { expected: sigmas.len(), found: lambdas.len() });
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("eigenvalues must be ascending".into()));
    }
    if sigmas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("singular values must be descending".into()));
    }
    Ok(lambdas.iter().zip(sigmas).map(|(l, s)| l * s * s).sum())
}

/// The `d` lowest eigenvalues of `f ↦ ‖f′‖²`: `0, 4π², 4π², 16π², 16π², …`.
pub fn mqv_eigenvalues(d: usize) -> Vec<f64> {
    (1..=d).map(|k| 4.0 * PI * PI * ((k / 2) * (k / 2)) as f64).collect()
}

/// Mean quadratic variation of the plots of the model's data, against its
/// lower bound `(1/n) Σ_{k≥2} 4π²⌊k/2⌋²σ_k²`.
pub fn mean_qv(basis: &AndrewsBasis, model: &PcaModel) -> Result<ObjectiveSummary> {
    basis.check_dim(model)?;
    let n = model.n_points();
    let value = mean_objective(basis, &model_moment(model), n, Functional::Mqv)?;
    let bound = spectral_lower_bound(&mqv_eigenvalues(basis.dim()), model.sigma().as_slice())? / n as f64;
    Ok(ObjectiveSummary::new(value, bound, degeneracy_warnings(model)))
}

/// Mean spatial-spectral quadratic variation against `(1/n) Σ λ_k σ_k²`.
/// For a smoothed basis the eigenvalues are its own; otherwise the spectrum
/// for `alpha` is converged with default settings.
pub fn mean_ssqv(basis: &AndrewsBasis, model: &PcaModel, alpha: f64) -> Result<ObjectiveSummary> {
    basis.check_dim(model)?;
    let d = basis.dim();
    let lambdas = match basis.alpha() {
        Some(a) if (a - alpha).abs() > 1e-12 * alpha.abs().max(1.0) => {
            return Err(Error::InvalidArgument(format!("basis was built for alpha = {a}, not {alpha}")));
        }
        Some(_) => basis.eigenvalues().to_vec(),
        None => {
            let spectrum = operator::converge(alpha, d, &ConvergeOptions::for_dim(d))?;
            if !spectrum.report.converged {
                return Err(Error::NotConverged {
                    n_final: spectrum.report.n_final,
                    max_last_delta: spectrum.report.max_last_delta.unwrap_or(f64::NAN),
                });
            }
            spectrum.values()
        }
    };
    let n = model.n_points();
    let value = mean_objective(basis, &model_moment(model), n, Functional::Ssqv(alpha))?;
    let bound = spectral_lower_bound(&lambdas, model.sigma().as_slice())? / n as f64;
    let mut warnings = degeneracy_warnings(model);
    warnings.extend(basis.spectral_warnings());
    Ok(ObjectiveSummary::new(value, bound, warnings))
}

fn degeneracy_warnings(model: &PcaModel) -> Vec<String> {
    model.degeneracy_report(DEFAULT_REL_GAP_TOL).iter().map(ToString::to_string).collect()
}
