//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p andrews-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use andrews_core::andrews::{mean_qv, mean_ssqv};
use andrews_core::operator::{self, build, eigh_tridiag, eigh_tridiag_lowest, lowest_d, Parity};
use andrews_core::{AndrewsBasis, ConvergeOptions, Dataset, HarmonicFunction, PcaModel, TridiagMatrix};
use rand::Rng;

const ATTAINMENT_REL: f64 = 1e-12;
const ATTAINMENT_TIME: Duration = Duration::from_secs(1);
const ORACLE_VALUE_TOL: f64 = 1e-8;
const ORACLE_RESIDUAL_TOL: f64 = 1e-9;
const ORACLE_TIME: Duration = Duration::from_secs(10);
const MONOTONE_SLACK: f64 = 1e-10;
const GRAM_TOL: f64 = 1e-9;
const IDENTITY_REL: f64 = 1e-6;
const DOMINANCE_SLACK: f64 = 1e-9;
const ROTATION_REL: f64 = 1e-12;
const ORDERING_SLACK: f64 = 1e-9;
const SSQV_REL_GAP: f64 = 1e-6;
const SPECTRUM_DIGITS_TOL: f64 = 1e-12;
const CONVERGE_TIME: Duration = Duration::from_secs(5);
const PLOT_TIME: Duration = Duration::from_secs(2);
const ALPHAS: [f64; 3] = [0.1, 1.0, 10.0];

struct Suite {
    failed: usize,
}

impl Suite {
    fn record(&mut self, id: &str, name: &str, outcome: Result<String, String>) {
        match outcome {
            Ok(detail) => println!("PASS  {id}  {name}: {detail}"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL  {id}  {name}: {detail}");
            }
        }
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures() -> Vec<(&'static str, Dataset)> {
    vec![("iris", common::iris()), ("breast-cancer", common::breast_cancer()), ("diabetes", common::diabetes())]
}

fn mqv_attainment() -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for (name, ds) in fixtures() {
        let start = Instant::now();
        let model = PcaModel::fit(&ds, true).map_err(|e| e.to_string())?;
        let basis = AndrewsBasis::classic(ds.dim()).map_err(|e| e.to_string())?;
        let value = mean_qv(&basis, &model).map_err(|e| e.to_string())?.value;
        let elapsed = start.elapsed();
        let s = model.sigma();
        let bound = (2..=ds.dim()).map(|k| 4.0 * PI * PI * ((k / 2) as f64).powi(2) * s[k - 1].powi(2)).sum::<f64>()
            / ds.len() as f64;
        let rel = (value - bound).abs() / bound;
        ensure(rel < ATTAINMENT_REL, || format!("{name}: rel err {rel:e}"))?;
        ensure(elapsed < ATTAINMENT_TIME, || format!("{name}: took {elapsed:?}"))?;
        worst = worst.max(rel);
        slowest = slowest.max(elapsed);
    }
    Ok(format!("max rel err {worst:.2e}, slowest {slowest:.2?}"))
}

fn dataset_shapes() -> Result<String, String> {
    let bc = common::breast_cancer();
    ensure((bc.len(), bc.dim()) == (569, 30), || format!("breast cancer is {}×{}", bc.len(), bc.dim()))?;
    let db = common::diabetes();
    ensure((db.len(), db.dim()) == (442, 10), || format!("diabetes is {}×{}", db.len(), db.dim()))?;
    let targets = andrews_core::dataset::load_targets(common::data_dir().join("diabetes.csv"), &"target".into(), true)
        .map_err(|e| e.to_string())?;
    let lo = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ensure(targets.len() == 442 && lo >= 25.0 && hi <= 356.0, || format!("targets in [{lo}, {hi}]"))?;
    Ok(format!("569×30, 442×10, targets in [{lo}, {hi}]"))
}

fn jacobi_matrices() -> Result<String, String> {
    for alpha in ALPHAS {
        let even = build(alpha, Parity::Even, 4).map_err(|e| e.to_string())?;
        let odd = build(alpha, Parity::Odd, 3).map_err(|e| e.to_string())?;
        let even_diag = [2.0, alpha + 2.0, 4.0 * alpha + 2.0, 9.0 * alpha + 2.0];
        let odd_diag = [alpha + 2.0, 4.0 * alpha + 2.0, 9.0 * alpha + 2.0];
        ensure(even.diag() == even_diag, || format!("α={alpha}: even diag {:?}", even.diag()))?;
        ensure(even.offdiag() == [-2f64.sqrt(), -1.0, -1.0], || format!("α={alpha}: even off {:?}", even.offdiag()))?;
        ensure(odd.diag() == odd_diag, || format!("α={alpha}: odd diag {:?}", odd.diag()))?;
        ensure(odd.offdiag() == [-1.0, -1.0], || format!("α={alpha}: odd off {:?}", odd.offdiag()))?;
    }
    Ok("B^E(4), B^O(3) exact for α ∈ {0.1, 1, 10}".into())
}

fn eigensolver_oracle() -> Result<String, String> {
    let mut rng = common::rng(2024);
    let start = Instant::now();
    let (mut worst_value, mut worst_residual) = (0.0f64, 0.0f64);
    for trial in 0..200 {
        let n = rng.random_range(1..=8);
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let off: Vec<f64> = (1..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let t = TridiagMatrix::new(diag.clone(), off.clone()).map_err(|e| e.to_string())?;
        let oracle = common::charpoly_eigenvalues(&diag, &off);
        let scale = t.max_abs().max(1.0);
        let all = eigh_tridiag(&t, f64::EPSILON).map_err(|e| e.to_string())?;
        let low = eigh_tridiag_lowest(&t, n).map_err(|e| e.to_string())?;
        for pairs in [&all, &low] {
            for (p, o) in pairs.iter().zip(&oracle) {
                let dv = (p.value - o).abs() / scale;
                let res = t.residual(p.value, &p.vector) / scale;
                ensure(dv < ORACLE_VALUE_TOL, || format!("trial {trial}: eigenvalue off by {dv:e}"))?;
                ensure(res < ORACLE_RESIDUAL_TOL, || format!("trial {trial}: residual {res:e}"))?;
                worst_value = worst_value.max(dv);
                worst_residual = worst_residual.max(res);
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_TIME, || format!("took {elapsed:?}"))?;
    Ok(format!("200 matrices, max |Δλ| {worst_value:.1e}, max residual {worst_residual:.1e}, {elapsed:.2?}"))
}

fn monotone_convergence() -> Result<String, String> {
    let sizes: Vec<usize> = (4..=10).map(|p| 1 << p).collect();
    let mut last_deltas = Vec::new();
    for alpha in ALPHAS {
        let rows: Vec<Vec<f64>> = sizes
            .iter()
            .map(|&n| lowest_d(alpha, 10, n).map(|b| b.values()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (w, n) in rows.windows(2).zip(&sizes) {
            for (k, (a, b)) in w[0].iter().zip(&w[1]).enumerate() {
                ensure(*b <= a + MONOTONE_SLACK, || format!("α={alpha}: λ_{} rises after N={n}", k + 1))?;
            }
        }
        let deltas: Vec<f64> = rows
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let tail = &deltas[deltas.len() - 3..];
        ensure(tail.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK), || {
            format!("α={alpha}: last deltas {tail:?} do not shrink")
        })?;
        last_deltas.push(format!("α={alpha}: {:.1e}", tail[2]));
    }
    Ok(format!("N = 16..1024, last deltas {}", last_deltas.join(", ")))
}

fn tail_bound() -> Result<String, String> {
    let mut worst_ratio = 0.0f64;
    for alpha in ALPHAS {
        for d in [3, 10, 30] {
            let b = operator::converge(alpha, d, &ConvergeOptions::for_dim(d)).map_err(|e| e.to_string())?;
            ensure(b.report.tail_bound_ok, || format!("α={alpha}, d={d}: library tail check failed"))?;
            let n = b.report.n_final as f64;
            for p in &b.pairs {
                let last = p.vector.last().copied().unwrap_or(0.0).abs();
                let bound = 2.0 / ((alpha * n * n + 2.0 - p.value) * (alpha * (n - 1.0).powi(2) + 2.0 - p.value));
                ensure(bound > 0.0 && last <= bound, || format!("α={alpha}, d={d}: |v_N| = {last:e} > {bound:e}"))?;
                if last > 0.0 {
                    worst_ratio = worst_ratio.max(last / bound);
                }
            }
        }
    }
    Ok(format!("α ∈ {{0.1, 1, 10}}, d ∈ {{3, 10, 30}}, max |v_N|/bound {worst_ratio:.1e}"))
}

fn isometry() -> Result<String, String> {
    let mut worst = 0.0f64;
    for alpha in ALPHAS {
        for d in 1..=30 {
            let b = AndrewsBasis::ssqv(d, alpha, 1e-9).map_err(|e| format!("α={alpha}, d={d}: {e}"))?;
            let dev = b.gram_deviation();
            ensure(dev < GRAM_TOL, || format!("α={alpha}, d={d}: ‖G − I‖ = {dev:e}"))?;
            worst = worst.max(dev);
        }
    }
    Ok(format!("d = 1..30, max ‖G − I‖_max {worst:.1e}"))
}

fn spectral_spatial_identity() -> Result<String, String> {
    let mut rng = common::rng(99);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let k = rng.random_range(0..=64);
        let cos: Vec<f64> = (0..=k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sin: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = HarmonicFunction::new(cos, sin);
        let alpha = ALPHAS[trial % 3];
        let spectral = f.ssqv(alpha).map_err(|e| e.to_string())?;
        let spatial = f.ssqv_spatial(alpha, 4 * k + 8).map_err(|e| e.to_string())?;
        let rel = (spectral - spatial).abs() / spectral.abs();
        ensure(rel < IDENTITY_REL, || format!("trial {trial} (K={k}): rel diff {rel:e}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("100 functions, K ≤ 64, max rel diff {worst:.1e}"))
}

fn dominance() -> Result<String, String> {
    let ds = common::iris();
    let model = PcaModel::fit(&ds, true).map_err(|e| e.to_string())?;
    let d = ds.dim();
    let classic = AndrewsBasis::classic(d).map_err(|e| e.to_string())?;
    let bound = mean_qv(&classic, &model).map_err(|e| e.to_string())?.lower_bound;
    let mut rng = common::rng(5);
    let mut min_excess = f64::INFINITY;
    for trial in 0..100 {
        let mut wide = AndrewsBasis::classic(d + trial % 5).map_err(|e| e.to_string())?;
        for j in 1..=(wide.dim() - 1) / 2 {
            wide = wide.rotate_pair(j, rng.random_range(0.0..2.0 * PI)).map_err(|e| e.to_string())?;
        }
        let q = common::random_orthogonal(&mut rng, wide.dim());
        let f = wide.functions();
        let basis = AndrewsBasis::custom(
            (0..d).map(|i| HarmonicFunction::combine((0..f.len()).map(|j| (q[(j, i)], &f[j])))).collect(),
        );
        let value = mean_qv(&basis, &model).map_err(|e| e.to_string())?.value;
        ensure(value >= bound - DOMINANCE_SLACK, || format!("trial {trial}: {value} < bound {bound}"))?;
        min_excess = min_excess.min(value - bound);
    }
    let base = mean_qv(&classic, &model).map_err(|e| e.to_string())?.value;
    for j in 1..=(d - 1) / 2 {
        for theta in [0.3, 1.7, 4.0] {
            let rotated = classic.rotate_pair(j, theta).map_err(|e| e.to_string())?;
            let value = mean_qv(&rotated, &model).map_err(|e| e.to_string())?.value;
            let rel = (value - base).abs() / base;
            ensure(rel <= ROTATION_REL, || format!("rotation j={j}, θ={theta}: rel change {rel:e}"))?;
        }
    }
    Ok(format!("100 random bases, min excess over bound {min_excess:.3e}; rotations invariant"))
}

fn optimality_ordering() -> Result<String, String> {
    let mut details = Vec::new();
    for (name, ds) in fixtures() {
        let model = PcaModel::fit(&ds, true).map_err(|e| e.to_string())?;
        let ssqv = AndrewsBasis::ssqv(ds.dim(), 1.0, 1e-9).map_err(|e| format!("{name}: {e}"))?;
        let classic = AndrewsBasis::classic(ds.dim()).map_err(|e| e.to_string())?;
        let own = mean_ssqv(&ssqv, &model, 1.0).map_err(|e| e.to_string())?;
        let other = mean_ssqv(&classic, &model, 1.0).map_err(|e| e.to_string())?;
        ensure(own.value <= other.value + ORDERING_SLACK, || format!("{name}: {} > {}", own.value, other.value))?;
        ensure(own.rel_gap < SSQV_REL_GAP, || format!("{name}: rel_gap {:e}", own.rel_gap))?;
        details.push(format!("{name} gap {:.1e}", own.rel_gap));
    }
    Ok(details.join(", "))
}

fn andrews_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_andrews"))
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let iris = common::data_dir().join("iris.csv");
    let mut outputs = Vec::new();
    for name in ["a.svg", "b.svg"] {
        let out = dir.path().join(name);
        let status = andrews_bin()
            .args(["plot", "--label-col", "species", "--mode", "classic", "--dataset"])
            .arg(&iris)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("plot exited with {status}"))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "SVG bytes differ between runs".into())?;

    let out = andrews_bin()
        .args(["spectrum", "--alpha", "1", "--d", "3", "--n0", "2"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("spectrum exited with {}", out.status))?;
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let row: Vec<f64> = text
        .lines()
        .skip_while(|l| l.trim() != "history")
        .nth(2)
        .ok_or("no history row")?
        .split_whitespace()
        .skip(1)
        .map(|v| v.parse().map_err(|_| format!("bad value {v}")))
        .collect::<Result<_, _>>()?;
    let expected = [1.0, (9.0 - 13f64.sqrt()) / 2.0, 4.0];
    ensure(row.len() == 3 && row.iter().zip(expected).all(|(a, b)| (a - b).abs() < SPECTRUM_DIGITS_TOL), || {
        format!("first history row {row:?}")
    })?;
    Ok(format!("{} identical SVG bytes; first row {row:?}", outputs[0].len()))
}

fn performance() -> Result<String, String> {
    let start = Instant::now();
    let b = operator::converge(1.0, 30, &ConvergeOptions::for_dim(30).with_tol(1e-9)).map_err(|e| e.to_string())?;
    let converge_time = start.elapsed();
    ensure(b.report.converged, || "converge(α=1, d=30) did not converge".into())?;
    ensure(converge_time < CONVERGE_TIME, || format!("converge took {converge_time:?}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let status = andrews_bin()
        .args(["plot", "--mode", "ssqv", "--alpha", "1", "--dataset"])
        .arg(common::data_dir().join("iris.csv"))
        .arg("--out")
        .arg(dir.path().join("iris-ssqv.svg"))
        .status()
        .map_err(|e| e.to_string())?;
    let plot_time = start.elapsed();
    ensure(status.success(), || format!("plot exited with {status}"))?;
    ensure(plot_time < PLOT_TIME, || format!("iris ssqv plot took {plot_time:?}"))?;
    Ok(format!("converge(d=30) {converge_time:.2?}, iris ssqv plot {plot_time:.2?}"))
}

fn main() {
    let mut suite = Suite { failed: 0 };
    suite.record("C01", "MQV attainment", mqv_attainment());
    suite.record("C02", "dataset shapes", dataset_shapes());
    suite.record("C03", "Jacobi matrices", jacobi_matrices());
    suite.record("C04", "eigensolver oracle", eigensolver_oracle());
    suite.record("C05", "monotone convergence", monotone_convergence());
    suite.record("C06", "tail bound", tail_bound());
    suite.record("C07", "isometry", isometry());
    suite.record("C08", "spectral/spatial SSQV identity", spectral_spatial_identity());
    suite.record("C09", "dominance", dominance());
    suite.record("C10", "optimality ordering", optimality_ordering());
    suite.record("C11", "end-to-end determinism", determinism());
    suite.record("C12", "performance", performance());
    if suite.failed > 0 {
        println!("{} of 12 criteria failed", suite.failed);
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
