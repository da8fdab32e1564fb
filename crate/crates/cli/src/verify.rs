//! Invariant checks run by `andrews verify`.

use std::fmt;

use andrews_core::andrews::{mean_qv, mean_ssqv};
use andrews_core::render;
use andrews_core::{AndrewsBasis, BasisKind, Dataset, HarmonicFunction, PcaModel};

use crate::compute::{compute, AppError, ComputeRequest, SpectrumMemo};

pub const GRAM_TOL: f64 = 1e-9;
pub const CLASSIC_ATTAINMENT_TOL: f64 = 1e-12;
pub const SSQV_GAP_TOL: f64 = 1e-6;
pub const MONOTONE_SLACK: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-6;
pub const CONTAINMENT_TOL: f64 = 1e-9;
pub const ISOMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "skip",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Check { name, status: if passed { Status::Pass } else { Status::Fail }, detail }
    }

    fn skip(name: &'static str, detail: &str) -> Self {
        Check { name, status: Status::Skip, detail: detail.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub n_final: Option<usize>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:<6} detail", "check", "status")?;
        for c in &self.checks {
            writeln!(f, "{:<16} {:<6} {}", c.name, c.status, c.detail)?;
        }
        if let Some(n) = self.n_final {
            writeln!(f, "N_final = {n}")?;
        }
        Ok(())
    }
}

/// Perturbs the last basis function so orthonormality and optimality break.
pub fn corrupt(basis: &AndrewsBasis) -> AndrewsBasis {
    let f = basis.functions();
    let mut functions = f.to_vec();
    let last = f.len() - 1;
    functions[last] = HarmonicFunction::combine([(1.0, &f[last]), (0.05, &f[0]), (0.05, &HarmonicFunction::sine(1))]);
    AndrewsBasis::custom(functions)
}

/// Runs the pipeline for `req` and checks its invariants. With `inject_fault`
/// the checks run against a corrupted copy of the basis.
pub fn verify(ds: &Dataset, req: &ComputeRequest, inject_fault: bool) -> Result<VerifyReport, AppError> {
    let computed = compute(ds, &req.dataset, req, &SpectrumMemo::default())?;
    let basis = if inject_fault { corrupt(&computed.basis) } else { computed.basis };
    let checks = run_checks(&computed.data, &computed.model, &basis, req.alpha, req.samples.min(128));
    Ok(VerifyReport { checks, n_final: computed.response.n_final })
}

pub fn run_checks(
    ds: &Dataset,
    model: &PcaModel,
    basis: &AndrewsBasis,
    alpha: Option<f64>,
    samples: usize,
) -> Vec<Check> {
    let mut checks = Vec::new();

    let dev = basis.gram_deviation();
    checks.push(Check::new("gram", dev < GRAM_TOL, format!("max|G - I| = {dev:.3e} (tol {GRAM_TOL:e})")));

    checks.push(match alpha {
        None => match mean_qv(basis, model) {
            Ok(s) => {
                let err = (s.value - s.lower_bound).abs() / s.lower_bound.abs().max(f64::MIN_POSITIVE);
                Check::new(
                    "attainment",
                    err < CLASSIC_ATTAINMENT_TOL || (s.value - s.lower_bound).abs() < CLASSIC_ATTAINMENT_TOL,
                    format!("mean QV {:.12e}, bound {:.12e}, rel err {err:.3e}", s.value, s.lower_bound),
                )
            }
            Err(e) => Check::new("attainment", false, e.to_string()),
        },
        Some(a) => match mean_ssqv(basis, model, a) {
            Ok(s) => Check::new(
                "attainment",
                s.rel_gap.abs() < SSQV_GAP_TOL,
                format!("mean SSQV {:.12e}, bound {:.12e}, rel gap {:.3e}", s.value, s.lower_bound, s.rel_gap),
            ),
            Err(e) => Check::new("attainment", false, e.to_string()),
        },
    });

    match basis.kind() {
        BasisKind::Ssqv { report, .. } => {
            checks.push(Check::new(
                "monotone",
                report.is_monotone(MONOTONE_SLACK),
                format!("{} truncations, N_final = {}", report.history.len(), report.n_final),
            ));
            checks.push(Check::new("tail_bound", report.tail_bound_ok, format!("N_final = {}", report.n_final)));
        }
        _ => {
            checks.push(Check::skip("monotone", "no spectrum for this basis"));
            checks.push(Check::skip("tail_bound", "no spectrum for this basis"));
        }
    }

    checks.push(ssqv_identity(basis, alpha.unwrap_or(1.0)));
    checks.push(band_containment(ds, model, basis, samples));
    checks.push(isometry(ds, model, basis));
    checks
}

fn ssqv_identity(basis: &AndrewsBasis, alpha: f64) -> Check {
    let mut worst = 0.0f64;
    for f in basis.functions() {
        let points = (4 * f.degree() + 8).max(64);
        match (f.ssqv(alpha), f.ssqv_spatial(alpha, points)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE)),
            (Err(e), _) | (_, Err(e)) => return Check::new("ssqv_identity", false, e.to_string()),
        }
    }
    Check::new("ssqv_identity", worst < IDENTITY_TOL, format!("max rel diff {worst:.3e} at alpha = {alpha}"))
}

/// Each class band must contain its members and the class mean, evaluated
/// pointwise from the embedded functions rather than the sampled matrix.
fn band_containment(ds: &Dataset, model: &PcaModel, basis: &AndrewsBasis, samples: usize) -> Check {
    let Some(labels) = ds.labels() else {
        return Check::skip("bands", "dataset has no labels");
    };
    let cs = match render::sample(basis, model, ds, samples) {
        Ok(cs) => cs,
        Err(e) => return Check::new("bands", false, e.to_string()),
    };
    let bands = render::envelopes(&cs);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for band in &bands {
        let members: Vec<usize> = (0..ds.len()).filter(|&i| labels[i] == band.label).collect();
        let mut mean = vec![0.0; ds.dim()];
        for &i in &members {
            mean.iter_mut().zip(ds.point(i).iter()).for_each(|(m, x)| *m += x / members.len() as f64);
        }
        let points = members.iter().map(|&i| ds.point(i).as_slice().to_vec()).chain(std::iter::once(mean));
        for x in points {
            let Ok(f) = basis.embed(model, &x) else {
                return Check::new("bands", false, "embedding failed".into());
            };
            for (j, &t) in cs.t.iter().enumerate() {
                let y = f.evaluate(t).unwrap_or(f64::NAN);
                scale = scale.max(y.abs());
                let excess = (band.lower[j] - y).max(y - band.upper[j]);
                worst = worst.max(if excess.is_nan() { f64::INFINITY } else { excess });
            }
        }
    }
    let tol = CONTAINMENT_TOL * (1.0 + scale);
    Check::new("bands", worst <= tol, format!("{} bands, max excursion {worst:.3e} (tol {tol:.1e})", bands.len()))
}

/// `‖f_x − f_y‖ = ‖x − y‖` on consecutive pairs of points.
fn isometry(ds: &Dataset, model: &PcaModel, basis: &AndrewsBasis) -> Check {
    let mut worst = 0.0f64;
    for i in 0..ds.len().saturating_sub(1).min(50) {
        let (x, y) = (ds.point(i), ds.point(i + 1));
        let (Ok(fx), Ok(fy)) = (basis.embed(model, x.as_slice()), basis.embed(model, y.as_slice())) else {
            return Check::new("isometry", false, "embedding failed".into());
        };
        let diff = HarmonicFunction::combine([(1.0, &fx), (-1.0, &fy)]);
        let expected = (&x - &y).norm();
        worst = worst.max((diff.norm_sq().sqrt() - expected).abs() / (1.0 + expected));
    }
    Check::new("isometry", worst < ISOMETRY_TOL, format!("max rel distortion {worst:.3e}"))
}
