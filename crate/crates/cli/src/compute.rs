//! Request and response types shared by the CLI and the HTTP service, and
//! the pipeline that turns one into the other.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, RwLock};

use andrews_core::andrews::{mean_qv, mean_ssqv, mqv_eigenvalues};
use andrews_core::dataset::{self, standardize};
use andrews_core::render::{self, DEFAULT_SAMPLES};
use andrews_core::{
    operator, AndrewsBasis, ColumnRef, ConvergeOptions, ConvergenceReport, Dataset, LabelSpec, PcaModel, PlotDocument,
    SpectralBasis,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Classic,
    Ssqv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeRequest {
    /// Dataset id (service) or file path (CLI).
    pub dataset: String,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_true")]
    pub center: bool,
    #[serde(default)]
    pub standardize: bool,
    /// `None` infers the label column from the data.
    #[serde(default)]
    pub label: Option<LabelSpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_true")]
    pub want_bands: bool,
    #[serde(default)]
    pub n0: Option<usize>,
    #[serde(default)]
    pub n_max: Option<usize>,
    /// Inline CSV text, accepted by the service only with uploads enabled.
    #[serde(default)]
    pub csv: Option<String>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_true() -> bool {
    true
}

fn default_tol() -> f64 {
    ConvergeOptions::DEFAULT_TOL
}

impl ComputeRequest {
    pub fn new(dataset: impl Into<String>, mode: Mode) -> Self {
        ComputeRequest {
            dataset: dataset.into(),
            mode,
            alpha: None,
            samples: DEFAULT_SAMPLES,
            center: true,
            standardize: false,
            label: None,
            tol: ConvergeOptions::DEFAULT_TOL,
            want_bands: true,
            n0: None,
            n_max: None,
            csv: None,
        }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        match (self.mode, self.alpha) {
            (Mode::Ssqv, None) => return Err(AppError::Input("mode ssqv requires alpha".into())),
            (Mode::Classic, Some(_)) => return Err(AppError::Input("alpha only applies to mode ssqv".into())),
            (Mode::Ssqv, Some(a)) if !(a > 0.0 && a.is_finite()) => {
                return Err(AppError::Input(format!("alpha must be positive and finite, got {a}")));
            }
            _ => {}
        }
        if self.samples < 2 {
            return Err(AppError::Input(format!("samples must be at least 2, got {}", self.samples)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(AppError::Input(format!("tol must be positive and finite, got {}", self.tol)));
        }
        Ok(())
    }

    /// Truncation schedule for a smoothed basis of dimension `d`.
    pub fn converge_options(&self, d: usize) -> ConvergeOptions {
        let mut opts = ConvergeOptions::for_dim(d).with_tol(self.tol);
        if let Some(n0) = self.n0 {
            opts.n0 = n0;
        }
        if let Some(n_max) = self.n_max {
            opts.n_max = n_max;
        }
        opts
    }
}

/// The JSON plot document extended with convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeResponse {
    pub dataset: String,
    pub mode: Mode,
    pub alpha: Option<f64>,
    #[serde(flatten)]
    pub plot: PlotDocument,
    pub rel_gap: Option<f64>,
    pub n_final: Option<usize>,
    pub max_last_delta: Option<f64>,
    pub converged: Option<bool>,
    pub tail_bound_ok: Option<bool>,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Input(String),
    #[error("unknown dataset {0:?}")]
    NotFound(String),
    #[error("{message}")]
    Numerical { message: String, report: Option<ConvergenceReport> },
    #[error("{0}")]
    Internal(String),
}

impl From<andrews_core::Error> for AppError {
    fn from(e: andrews_core::Error) -> Self {
        use andrews_core::Error as E;
        match e {
            E::NoConvergence { .. }
            | E::NotConverged { .. }
            | E::DegenerateSpectrum { .. }
            | E::TailBoundNotApplicable(_) => AppError::Numerical { message: e.to_string(), report: None },
            _ => AppError::Input(e.to_string()),
        }
    }
}

/// Converged spectra keyed by `(round(α·10¹²), d, tol, N0, N_max)`.
#[derive(Debug, Default)]
pub struct SpectrumMemo {
    entries: RwLock<HashMap<MemoKey, Arc<SpectralBasis>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct MemoKey {
    alpha: i128,
    d: usize,
    tol: u64,
    n0: usize,
    n_max: usize,
}

impl SpectrumMemo {
    pub fn get_or_compute(
        &self,
        alpha: f64,
        d: usize,
        opts: &ConvergeOptions,
    ) -> andrews_core::Result<Arc<SpectralBasis>> {
        let key = MemoKey {
            alpha: (alpha * 1e12).round() as i128,
            d,
            tol: opts.tol.to_bits(),
            n0: opts.n0,
            n_max: opts.n_max,
        };
        if let Some(hit) = self.entries.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(Arc::clone(hit));
        }
        let fresh = Arc::new(operator::converge(alpha, d, opts)?);
        // identical keys produce identical values, so racing inserts are benign
        self.entries.write().unwrap_or_else(|e| e.into_inner()).insert(key, Arc::clone(&fresh));
        Ok(fresh)
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parses CSV bytes with a header row. Without an explicit label spec the
/// first non-numeric column, if any, becomes the label column.
pub fn parse_dataset(bytes: &[u8], label: Option<&LabelSpec>) -> andrews_core::Result<Dataset> {
    if let Some(spec) = label {
        return dataset::parse_csv(bytes, spec, true);
    }
    match dataset::parse_csv(bytes, &LabelSpec::None, true) {
        Err(andrews_core::Error::NonNumeric { column, .. }) => {
            dataset::parse_csv(bytes, &LabelSpec::Column(ColumnRef::Index(column - 1)), true)
        }
        other => other,
    }
}

pub fn load_dataset(path: &Path, label: Option<&LabelSpec>) -> andrews_core::Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|source| andrews_core::Error::Io { path: path.to_path_buf(), source })?;
    parse_dataset(&bytes, label)
}

/// Everything the pipeline produces for one request.
pub struct Computed {
    pub response: ComputeResponse,
    pub model: PcaModel,
    pub basis: AndrewsBasis,
    pub data: Dataset,
}

/// Fits, builds the basis, samples curves and bands, and evaluates the
/// matching objective. `id` names the dataset in the response.
pub fn compute(ds: &Dataset, id: &str, req: &ComputeRequest, memo: &SpectrumMemo) -> Result<Computed, AppError> {
    req.validate()?;
    let data = if req.standardize { standardize(ds) } else { ds.clone() };
    let d = data.dim();
    let model = PcaModel::fit(&data, req.center)?;

    let (basis, report) = match (req.mode, req.alpha) {
        (Mode::Ssqv, Some(alpha)) => {
            let spectrum = memo.get_or_compute(alpha, d, &req.converge_options(d))?;
            if !spectrum.report.converged {
                return Err(AppError::Numerical {
                    message: format!(
                        "eigenvalues did not converge by N = {} (last delta {:e}, tol {:e})",
                        spectrum.report.n_final,
                        spectrum.report.max_last_delta.unwrap_or(f64::NAN),
                        req.tol
                    ),
                    report: Some(spectrum.report.clone()),
                });
            }
            (AndrewsBasis::from_spectrum(&spectrum)?, Some(spectrum.report.clone()))
        }
        _ => (AndrewsBasis::classic(d)?, None),
    };

    let summary = match req.alpha {
        Some(alpha) => mean_ssqv(&basis, &model, alpha)?,
        None => mean_qv(&basis, &model)?,
    };
    let eigenvalues = match req.mode {
        Mode::Classic => mqv_eigenvalues(d),
        Mode::Ssqv => basis.eigenvalues().to_vec(),
    };
    let cs = render::sample(&basis, &model, &data, req.samples)?;
    let bands = if req.want_bands { render::envelopes(&cs) } else { Vec::new() };

    let mut warnings = summary.warnings.clone();
    if report.as_ref().is_some_and(|r| !r.tail_bound_ok) {
        warnings.push("an eigenvector's last entry exceeds the truncation tail bound".into());
    }
    let response = ComputeResponse {
        dataset: id.to_string(),
        mode: req.mode,
        alpha: req.alpha,
        plot: PlotDocument::new(&cs, &bands, Some(&summary), &eigenvalues),
        rel_gap: Some(summary.rel_gap),
        n_final: report.as_ref().map(|r| r.n_final),
        max_last_delta: report.as_ref().and_then(|r| r.max_last_delta),
        converged: report.as_ref().map(|r| r.converged),
        tail_bound_ok: report.as_ref().map(|r| r.tail_bound_ok),
        warnings,
    };
    Ok(Computed { response, model, basis, data })
}

pub fn to_json(response: &ComputeResponse) -> Vec<u8> {
    serde_json::to_vec(response).expect("response serializes")
}
