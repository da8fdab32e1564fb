//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::path::PathBuf;

use andrews_core::dataset::{self, ColumnRef, LabelSpec};
use andrews_core::Dataset;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn iris() -> Dataset {
    dataset::load_csv(data_dir().join("iris.csv"), &LabelSpec::Column(ColumnRef::Name("species".into())), true).unwrap()
}

pub fn breast_cancer() -> Dataset {
    dataset::load_csv(
        data_dir().join("breast-cancer.csv"),
        &LabelSpec::Column(ColumnRef::Name("diagnosis".into())),
        true,
    )
    .unwrap()
}

pub fn diabetes() -> Dataset {
    dataset::load_csv(data_dir().join("diabetes.csv"), &LabelSpec::Quartile(ColumnRef::Name("target".into())), true)
        .unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a dense symmetric
/// matrix by cyclic Jacobi rotations.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)] == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Number of eigenvalues of the tridiagonal matrix below `x`, from sign
/// changes of the characteristic polynomial sequence
/// `p_k(x) = (d_k − x) p_{k−1} − e_{k−1}² p_{k−2}`.
pub fn charpoly_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let (mut prev, mut cur) = (1.0f64, diag[0] - x);
    let mut changes = usize::from(cur < 0.0 || (cur == 0.0 && prev > 0.0));
    let mut sign_prev = if cur != 0.0 { cur.signum() } else { -prev.signum() };
    for k in 1..diag.len() {
        let next = (diag[k] - x) * cur - off[k - 1].powi(2) * prev;
        prev = cur;
        cur = next;
        // rescale to avoid overflow; signs are unaffected
        let m = cur.abs().max(prev.abs());
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            cur /= m;
            prev /= m;
        }
        let sign = if cur != 0.0 { cur.signum() } else { -sign_prev };
        if sign != sign_prev {
            changes += 1;
        }
        sign_prev = sign;
    }
    changes
}

/// All eigenvalues, ascending, by bisection on [`charpoly_count`].
pub fn charpoly_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let radius = off.iter().fold(0.0f64, |m, e| m.max(e.abs())) * 2.0;
    let lo0 = diag.iter().cloned().fold(f64::INFINITY, f64::min) - radius - 1.0;
    let hi0 = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + radius + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if charpoly_count(diag, off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Random `n × n` orthogonal matrix from the QR factors of a uniform matrix.
pub fn random_orthogonal(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}
