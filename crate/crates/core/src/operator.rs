//! Truncated Jacobi operators and their low eigenpairs.
//!
//! The smoothing functional splits into two real Jacobi operators acting on
//! the cosine coefficients (`Even`, indices `0, 1, 2, …`) and the sine
//! coefficients (`Odd`, indices `1, 2, …`). Both have diagonal `αk² + 2` and
//! off-diagonal `−1`, except that the first even off-diagonal is `−√2`.
//! Their `N × N` leading minors have eigenvalues that decrease monotonically
//! in `N` towards the operator eigenvalues, which is what [`converge`] uses
//! as its stopping rule.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign::canonicalize_sign;

/// Spacing below which merged eigenvalues of opposite parity count as tied.
pub const MERGE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "E")]
    Even,
    #[serde(rename = "O")]
    Odd,
}

impl Parity {
    pub fn symbol(self) -> char {
        match self {
            Parity::Even => 'E',
            Parity::Odd => 'O',
        }
    }
}

/// Diagonal entry at zero-based position `i` of the Jacobi operator.
pub fn jacobi_diagonal(alpha: f64, parity: Parity, i: usize) -> f64 {
    let k = match parity {
        Parity::Even => i,
        Parity::Odd => i + 1,
    };
    alpha * (k * k) as f64 + 2.0
}

/// Off-diagonal entry between positions `i` and `i + 1`.
pub fn jacobi_offdiagonal(parity: Parity, i: usize) -> f64 {
    match (parity, i) {
        (Parity::Even, 0) => -SQRT_2,
        _ => -1.0,
    }
}

/// Bilinear form `⟨B u, v⟩` of the (untruncated) Jacobi operator on finitely
/// supported vectors; missing trailing entries are zero.
pub fn jacobi_form(alpha: f64, parity: Parity, u: &[f64], v: &[f64]) -> f64 {
    let len = u.len().max(v.len());
    let at = |w: &[f64], i: usize| w.get(i).copied().unwrap_or(0.0);
    let mut acc = 0.0;
    for i in 0..len {
        let (ui, vi) = (at(u, i), at(v, i));
        acc += jacobi_diagonal(alpha, parity, i) * ui * vi;
        if i + 1 < len {
            acc += jacobi_offdiagonal(parity, i) * (ui * at(v, i + 1) + at(u, i + 1) * vi);
        }
    }
    acc
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("tridiagonal matrix must be at least 1×1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch { expected: diag.len() - 1, found: offdiag.len() });
        }
        if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(Error::NotFinite);
        }
        Ok(TridiagMatrix { diag, offdiag })
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.diag.iter().chain(&self.offdiag).fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `T v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * v[i];
                if i > 0 {
                    y += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    y += self.offdiag[i] * v[i + 1];
                }
                y
            })
            .collect()
    }

    /// `‖T v − λ v‖₂`.
    pub fn residual(&self, value: f64, v: &[f64]) -> f64 {
        self.apply(v).iter().zip(v).map(|(tv, x)| (tv - value * x).powi(2)).sum::<f64>().sqrt()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            q = self.diag[i] - x - if i > 0 { self.offdiag[i - 1].powi(2) / q } else { 0.0 };
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// `N × N` leading minor of the even or odd Jacobi operator.
pub fn build(alpha: f64, parity: Parity, n: usize) -> Result<TridiagMatrix> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::InvalidArgument("truncation size must be at least 1".into()));
    }
    let diag = (0..n).map(|i| jacobi_diagonal(alpha, parity, i)).collect();
    let offdiag = (0..n - 1).map(|i| jacobi_offdiagonal(parity, i)).collect();
    TridiagMatrix::new(diag, offdiag)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must be positive and finite, got {alpha}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: f64,
    /// Unit eigenvector of length `trunc_n`.
    pub vector: Vec<f64>,
    /// `None` for matrices that are not one of the Jacobi truncations.
    pub parity: Option<Parity>,
    pub trunc_n: usize,
}

/// All eigenpairs of `t`, ascending, by implicit-shift QL iteration.
///
/// Off-diagonal entries are deflated once they fall below
/// `max(tol, ε) · max_i(|d_i| + |e_i|)`.
pub fn eigh_tridiag(t: &TridiagMatrix, tol: f64) -> Result<Vec<EigenPair>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = t.len();
    let mut d = t.diag.clone();
    let mut e = t.offdiag.clone();
    e.push(0.0);
    // column-major n × n, column i is the i-th eigenvector
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    let eps = tol.max(f64::EPSILON);
    let max_iter = 30 * n.max(1);

    let mut shift = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (left, right) = z.split_at_mut((i + 1) * n);
                    let zi = &mut left[i * n..];
                    let zi1 = &mut right[..n];
                    for k in 0..n {
                        let h = zi1[k];
                        zi1[k] = s * zi[k] + c * h;
                        zi[k] = c * zi[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += shift;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .map(|i| {
            let mut vector = z[i * n..(i + 1) * n].to_vec();
            normalize(&mut vector);
            EigenPair { value: d[i], vector, parity: None, trunc_n: n }
        })
        .collect())
}

/// The `count` smallest eigenpairs of `t`, ascending, by Sturm bisection
/// followed by inverse iteration.
///
/// Bisection resolves each eigenvalue to a few ulps of its own magnitude,
/// which matters for the Jacobi truncations: their norms grow like `αN²`
/// while the eigenvalues of interest stay `O(α + 2)`.
pub fn eigh_tridiag_lowest(t: &TridiagMatrix, count: usize) -> Result<Vec<EigenPair>> {
    let n = t.len();
    if count > n {
        return Err(Error::InvalidArgument(format!("requested {count} eigenpairs of a {n}×{n} matrix")));
    }
    let max_e2 = t.offdiag.iter().fold(1.0f64, |m, x| m.max(x * x));
    let pivmin = f64::MIN_POSITIVE * max_e2;
    let (glo, ghi) = t.gershgorin();
    let span = (ghi - glo).max(f64::MIN_POSITIVE);
    let (glo, ghi) = (glo - 2.0 * f64::EPSILON * span - pivmin, ghi + 2.0 * f64::EPSILON * span + pivmin);

    let mut brackets = Vec::with_capacity(count);
    let mut floor = glo;
    for k in 0..count {
        let (mut lo, mut hi) = (floor, ghi);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + pivmin {
                break;
            }
            if t.count_below(mid, pivmin) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        brackets.push((lo, hi));
        floor = lo;
    }

    let scale = t.max_abs().max(f64::MIN_POSITIVE);
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(count);
    for (k, &(lo, hi)) in brackets.iter().enumerate() {
        let mid = 0.5 * (lo + hi);
        let vector = inverse_iteration(t, mid, &pairs, scale).ok_or(Error::NoConvergence { index: k })?;
        // the Rayleigh quotient refines the bracket midpoint when it agrees
        let rayleigh: f64 = t.apply(&vector).iter().zip(&vector).map(|(a, b)| a * b).sum();
        let value = if (lo..=hi).contains(&rayleigh) { rayleigh } else { mid };
        pairs.push(EigenPair { value, vector, parity: None, trunc_n: n });
    }
    Ok(pairs)
}

fn inverse_iteration(t: &TridiagMatrix, value: f64, previous: &[EigenPair], scale: f64) -> Option<Vec<f64>> {
    let n = t.len();
    if n == 1 {
        return Some(vec![1.0]);
    }
    let lu = ShiftedLu::factor(t, value, f64::EPSILON * scale);
    // deterministic start with no special alignment to any eigenvector
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7919 % 101) as f64 / 101.0)).collect();
    normalize(&mut x);
    let tol = 1e-12 * (value.abs() + scale);
    // a second solve cleans the components a single one leaves at ~1e-24
    for iter in 0..8 {
        lu.solve(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        normalize(&mut x);
        for _ in 0..2 {
            for p in previous {
                let dot: f64 = p.vector.iter().zip(&x).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(&p.vector).for_each(|(xi, pi)| *xi -= dot * pi);
            }
        }
        if !normalize(&mut x) {
            return None;
        }
        if iter >= 1 && t.residual(value, &x) <= tol {
            break;
        }
    }
    Some(x)
}

/// LU factors with partial pivoting of `T − σI`.
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &TridiagMatrix, shift: f64, tiny: f64) -> Self {
        let n = t.len();
        let mut u0: Vec<f64> = t.diag.iter().map(|d| d - shift).collect();
        let mut u1 = t.offdiag.clone();
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut mult = vec![0.0; n - 1];
        let mut swapped = vec![false; n - 1];
        let sub = &t.offdiag;
        for k in 0..n - 1 {
            if u0[k].abs() >= sub[k].abs() {
                if u0[k] == 0.0 {
                    u0[k] = tiny;
                }
                mult[k] = sub[k] / u0[k];
                u0[k + 1] -= mult[k] * u1[k];
            } else {
                mult[k] = u0[k] / sub[k];
                let next_u0 = u0[k + 1];
                let next_u1 = if k + 1 < n - 1 { u1[k + 1] } else { 0.0 };
                let cur_u1 = u1[k];
                u0[k] = sub[k];
                u1[k] = next_u0;
                if k + 2 < n {
                    u2[k] = next_u1;
                }
                u0[k + 1] = cur_u1 - mult[k] * next_u0;
                if k + 1 < n - 1 {
                    u1[k + 1] = -mult[k] * next_u1;
                }
                swapped[k] = true;
            }
        }
        if u0[n - 1] == 0.0 {
            u0[n - 1] = tiny;
        }
        ShiftedLu { u0, u1, u2, mult, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for k in 0..n - 1 {
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
            b[k + 1] -= self.mult[k] * b[k];
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            if k + 1 < n {
                acc -= self.u1[k] * b[k + 1];
            }
            if k + 2 < n {
                acc -= self.u2[k] * b[k + 2];
            }
            b[k] = acc / self.u0[k];
        }
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Signs the eigenvector so its largest-magnitude entry is positive (lowest
/// index wins ties). Idempotent.
pub fn align_sign(mut pair: EigenPair) -> Result<EigenPair> {
    if canonicalize_sign(&mut pair.vector) {
        Ok(pair)
    } else {
        Err(Error::InvalidArgument("cannot align the sign of a zero vector".into()))
    }
}

/// Checks the decay bound on the last eigenvector entry of a truncated
/// Jacobi operator.
///
/// From the last two rows of `(T − λ)v = 0` with `|v_i| ≤ 1`:
/// `|v_N| ≤ |e_{N−1}|(|e_{N−2}| + |e_{N−1}|) / ((d_N − λ)(d_{N−1} − λ))`,
/// which for unit off-diagonals is `2 / ((d_N − λ)(d_{N−1} − λ))`. The bound
/// needs `d_{N−1} > λ`; otherwise [`Error::TailBoundNotApplicable`].
pub fn tail_bound_check(pair: &EigenPair, alpha: f64) -> Result<(bool, f64)> {
    check_alpha(alpha)?;
    let parity =
        pair.parity.ok_or_else(|| Error::TailBoundNotApplicable("eigenpair is not tagged with a parity".into()))?;
    let n = pair.trunc_n;
    if n < 2 || pair.vector.len() != n {
        return Err(Error::TailBoundNotApplicable(format!("truncation size {n} is below 2")));
    }
    let d_last = jacobi_diagonal(alpha, parity, n - 1);
    let d_prev = jacobi_diagonal(alpha, parity, n - 2);
    if d_prev <= pair.value {
        return Err(Error::TailBoundNotApplicable(format!(
            "eigenvalue {} is not below the diagonal entry {d_prev} at N = {n}",
            pair.value
        )));
    }
    let e_last = jacobi_offdiagonal(parity, n - 2).abs();
    let e_prev = if n >= 3 { jacobi_offdiagonal(parity, n - 3).abs() } else { 0.0 };
    let bound = e_last * (e_prev + e_last) / ((d_last - pair.value) * (d_prev - pair.value));
    Ok((pair.vector[n - 1].abs() <= bound, bound))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRow {
    pub n: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n_final: usize,
    /// Merged lowest-`d` eigenvalues at each truncation size tried.
    pub history: Vec<HistoryRow>,
    /// `max_k (λ_k(N/2) − λ_k(N))` for the last doubling; `None` before any.
    pub max_last_delta: Option<f64>,
    pub converged: bool,
    /// Every returned eigenvector satisfies [`tail_bound_check`].
    pub tail_bound_ok: bool,
}

impl ConvergenceReport {
    /// `λ_k(N)` histories are non-increasing in `N` up to `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.history.windows(2).all(|w| w[0].values.iter().zip(&w[1].values).all(|(a, b)| *b <= *a + slack))
    }

    /// Per-doubling `max_k (λ_k(N) − λ_k(2N))`.
    pub fn deltas(&self) -> Vec<f64> {
        self.history
            .windows(2)
            .map(|w| w[0].values.iter().zip(&w[1].values).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

/// The `d` lowest merged eigenpairs of a truncated even/odd pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralBasis {
    pub pairs: Vec<EigenPair>,
    pub alpha: f64,
    pub report: ConvergenceReport,
}

impl SpectralBasis {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    /// Smallest gap between consecutive merged eigenvalues, with the index of
    /// its lower member.
    pub fn min_gap(&self) -> Option<(usize, f64)> {
        self.pairs.windows(2).enumerate().map(|(i, w)| (i, w[1].value - w[0].value)).min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Smallest gap between consecutive merged eigenvalues of equal parity,
    /// with the index of its lower member.
    pub fn min_same_parity_gap(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, a) in self.pairs.iter().enumerate() {
            if let Some(b) = self.pairs[i + 1..].iter().find(|b| b.parity == a.parity) {
                let g = b.value - a.value;
                if best.is_none_or(|(_, m)| g < m) {
                    best = Some((i, g));
                }
            }
        }
        best
    }

    /// Smallest `|λ_E − λ_O|` over the returned pairs of opposite parity.
    pub fn min_cross_parity_gap(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for a in self.pairs.iter().filter(|p| p.parity == Some(Parity::Even)) {
            for b in self.pairs.iter().filter(|p| p.parity == Some(Parity::Odd)) {
                let g = (a.value - b.value).abs();
                best = Some(best.map_or(g, |m| m.min(g)));
            }
        }
        best
    }
}

fn lowest_pairs(alpha: f64, d: usize, n: usize) -> Result<Vec<EigenPair>> {
    check_alpha(alpha)?;
    if d == 0 {
        return Err(Error::InvalidArgument("need at least one eigenpair".into()));
    }
    if n == 0 || d > 2 * n {
        return Err(Error::InvalidArgument(format!(
            "{d} eigenpairs requested but truncation N = {n} only provides {}",
            2 * n
        )));
    }
    let count = d.min(n);
    let solve = |parity: Parity| -> Result<Vec<EigenPair>> {
        let t = build(alpha, parity, n)?;
        eigh_tridiag_lowest(&t, count)?
            .into_iter()
            .map(|mut p| {
                p.parity = Some(parity);
                align_sign(p)
            })
            .collect()
    };
    let (even, odd) = if n >= 512 {
        std::thread::scope(|s| {
            let odd = s.spawn(|| solve(Parity::Odd));
            let even = solve(Parity::Even);
            (even, odd.join().expect("odd-parity eigensolver panicked"))
        })
    } else {
        (solve(Parity::Even), solve(Parity::Odd))
    };
    Ok(merge_parities(even?, odd?, d))
}

fn merge_parities(even: Vec<EigenPair>, odd: Vec<EigenPair>, d: usize) -> Vec<EigenPair> {
    let mut out = Vec::with_capacity(d);
    let mut even = even.into_iter().peekable();
    let mut odd = odd.into_iter().peekable();
    while out.len() < d {
        let take_even = match (even.peek(), odd.peek()) {
            (Some(e), Some(o)) => e.value <= o.value || (e.value - o.value).abs() < MERGE_TIE_TOL,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        let next = if take_even { even.next() } else { odd.next() };
        out.extend(next);
    }
    out
}

fn tail_ok(pairs: &[EigenPair], alpha: f64) -> bool {
    pairs.iter().all(|p| matches!(tail_bound_check(p, alpha), Ok((true, _))))
}

/// Diagonalizes `B_α^E(N)` and `B_α^O(N)` and returns the `d` smallest
/// eigenpairs of the union, ascending, sign-aligned. Exact cross-parity ties
/// go to the even pair.
pub fn lowest_d(alpha: f64, d: usize, n: usize) -> Result<SpectralBasis> {
    let pairs = lowest_pairs(alpha, d, n)?;
    let report = ConvergenceReport {
        n_final: n,
        history: vec![HistoryRow { n, values: pairs.iter().map(|p| p.value).collect() }],
        max_last_delta: None,
        converged: false,
        tail_bound_ok: tail_ok(&pairs, alpha),
    };
    Ok(SpectralBasis { pairs, alpha, report })
}

/// Doubling schedule for [`converge`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergeOptions {
    /// Absolute stopping tolerance on `max_k (λ_k(N) − λ_k(2N))`.
    pub tol: f64,
    pub n0: usize,
    pub n_max: usize,
}

impl ConvergeOptions {
    pub const DEFAULT_TOL: f64 = 1e-9;
    pub const DEFAULT_N_MAX: usize = 4096;

    pub fn for_dim(d: usize) -> Self {
        ConvergeOptions { tol: Self::DEFAULT_TOL, n0: d.max(32), n_max: Self::DEFAULT_N_MAX }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Doubles the truncation size from `n0` until the lowest `d` merged
/// eigenvalues move by less than `tol`, or `n_max` would be exceeded. A run
/// that hits `n_max` returns its last basis with `report.converged == false`.
pub fn converge(alpha: f64, d: usize, opts: &ConvergeOptions) -> Result<SpectralBasis> {
    check_alpha(alpha)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("need at least one eigenpair".into()));
    }
    if d > 2 * opts.n_max {
        return Err(Error::InvalidArgument(format!(
            "{d} eigenpairs requested but N_max = {} only provides {}",
            opts.n_max,
            2 * opts.n_max
        )));
    }
    if opts.n0 == 0 || 2 * opts.n0 < d || opts.n_max < opts.n0 {
        return Err(Error::InvalidArgument(format!(
            "need 2·N0 ≥ d and N_max ≥ N0 (d = {d}, N0 = {}, N_max = {})",
            opts.n0, opts.n_max
        )));
    }

    let mut n = opts.n0;
    let mut pairs = lowest_pairs(alpha, d, n)?;
    let mut history = vec![HistoryRow { n, values: pairs.iter().map(|p| p.value).collect() }];
    let mut max_last_delta = None;
    let mut converged = false;
    while 2 * n <= opts.n_max {
        n *= 2;
        let next = lowest_pairs(alpha, d, n)?;
        let delta = pairs.iter().zip(&next).map(|(a, b)| a.value - b.value).fold(f64::NEG_INFINITY, f64::max);
        history.push(HistoryRow { n, values: next.iter().map(|p| p.value).collect() });
        pairs = next;
        max_last_delta = Some(delta);
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    let report =
        ConvergenceReport { n_final: n, history, max_last_delta, converged, tail_bound_ok: tail_ok(&pairs, alpha) };
    Ok(SpectralBasis { pairs, alpha, report })
}
