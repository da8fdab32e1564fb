//! Finite real Fourier series in the orthonormal basis
//! `{1, √2cos(2πkt), √2sin(2πkt)}` of `L²([0,1])`.
//!
//! Coefficients are stored as two real sequences, the cosine/constant part
//! `c_0..c_K` and the sine part `s_1..s_K`. That is exactly the even/odd
//! split of a conjugate-symmetric coefficient sequence, so real-valuedness
//! holds by construction.

use std::f64::consts::{PI, SQRT_2, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{jacobi_form, Parity};

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicFunction {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl HarmonicFunction {
    /// `cos[k]` multiplies `√2cos(2πkt)` (`cos[0]` the constant 1);
    /// `sin[k − 1]` multiplies `√2sin(2πkt)`. Both are zero-padded to a
    /// common degree.
    pub fn new(mut cos: Vec<f64>, mut sin: Vec<f64>) -> Self {
        if cos.is_empty() {
            cos.push(0.0);
        }
        let degree = (cos.len() - 1).max(sin.len());
        cos.resize(degree + 1, 0.0);
        sin.resize(degree, 0.0);
        HarmonicFunction { cos, sin }
    }

    pub fn zero() -> Self {
        HarmonicFunction::new(vec![0.0], vec![])
    }

    pub fn constant(c: f64) -> Self {
        HarmonicFunction::new(vec![c], vec![])
    }

    /// `√2cos(2πkt)` for `k ≥ 1`, the constant 1 for `k = 0`.
    pub fn cosine(k: usize) -> Self {
        let mut cos = vec![0.0; k + 1];
        cos[k] = 1.0;
        HarmonicFunction::new(cos, vec![])
    }

    /// `√2sin(2πkt)`, `k ≥ 1`.
    pub fn sine(k: usize) -> Self {
        assert!(k >= 1, "sine harmonics start at k = 1");
        let mut sin = vec![0.0; k];
        sin[k - 1] = 1.0;
        HarmonicFunction::new(vec![0.0], sin)
    }

    pub fn degree(&self) -> usize {
        self.sin.len()
    }

    /// `c_0..c_K`.
    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    /// `s_1..s_K`.
    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// `f(t)` for `t ∈ [0, 1]`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} lies outside [0, 1]")));
        }
        Ok(self.eval_periodic(t))
    }

    /// Evaluation at any real `t`, reducing `kt` modulo 1 first.
    pub(crate) fn eval_periodic(&self, t: f64) -> f64 {
        let mut acc = self.cos[0];
        let mut tail = 0.0;
        for k in 1..=self.degree() {
            let (c, s) = (self.cos[k], self.sin[k - 1]);
            if c == 0.0 && s == 0.0 {
                continue;
            }
            let (sn, cs) = (TAU * (k as f64 * t).fract()).sin_cos();
            tail += c * cs + s * sn;
        }
        acc += SQRT_2 * tail;
        acc
    }

    /// `‖f‖²` by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.inner_product(self)
    }

    /// `⟨f, g⟩_{L²}` from coefficients.
    pub fn inner_product(&self, other: &HarmonicFunction) -> f64 {
        dot(&self.cos, &other.cos) + dot(&self.sin, &other.sin)
    }

    /// Mean quadratic variation `‖f′‖²`.
    pub fn mqv(&self) -> f64 {
        self.mqv_pair(self)
    }

    /// `⟨f′, g′⟩ = Σ 4π²k² (c_k c′_k + s_k s′_k)`.
    pub fn mqv_pair(&self, other: &HarmonicFunction) -> f64 {
        let cos = self.cos.iter().zip(&other.cos).enumerate().skip(1).map(|(k, (a, b))| (k * k) as f64 * a * b);
        let sin = self.sin.iter().zip(&other.sin).enumerate().map(|(i, (a, b))| ((i + 1) * (i + 1)) as f64 * a * b);
        4.0 * PI * PI * cos.chain(sin).sum::<f64>()
    }

    /// Spatial-spectral quadratic variation
    /// `(α/4π²)‖f′‖² + Σ_k |f̂[k+1] − f̂[k]|²`, evaluated as the even and odd
    /// Jacobi quadratic forms on the coefficient sequences.
    pub fn ssqv(&self, alpha: f64) -> Result<f64> {
        self.ssqv_pair(self, alpha)
    }

    /// Bilinear form underlying [`ssqv`](Self::ssqv).
    pub fn ssqv_pair(&self, other: &HarmonicFunction, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive and finite, got {alpha}")));
        }
        Ok(jacobi_form(alpha, Parity::Even, &self.cos, &other.cos)
            + jacobi_form(alpha, Parity::Odd, &self.sin, &other.sin))
    }

    /// [`ssqv`](Self::ssqv) evaluated through the spatial identity
    /// `Σ|f̂[k+1] − f̂[k]|² = 2∫(1 − cos 2πt)|f(t)|² dt`, with the integral
    /// done by the trapezoid rule on `points` equispaced nodes.
    pub fn ssqv_spatial(&self, alpha: f64, points: usize) -> Result<f64> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive and finite, got {alpha}")));
        }
        let needed = 4 * self.degree() + 8;
        if points < needed {
            return Err(Error::InvalidArgument(format!(
                "{points} quadrature points are too few for degree {} (need {needed})",
                self.degree()
            )));
        }
        let integral = periodic_trapezoid(points, |t| {
            let f = self.eval_periodic(t);
            2.0 * (1.0 - (TAU * t).cos()) * f * f
        });
        Ok(alpha / (4.0 * PI * PI) * self.mqv() + integral)
    }

    /// Linear combination `Σ w_i f_i`.
    pub fn combine<'a>(terms: impl IntoIterator<Item = (f64, &'a HarmonicFunction)>) -> HarmonicFunction {
        let mut cos: Vec<f64> = vec![0.0];
        let mut sin: Vec<f64> = Vec::new();
        for (w, f) in terms {
            if cos.len() < f.cos.len() {
                cos.resize(f.cos.len(), 0.0);
                sin.resize(f.sin.len(), 0.0);
            }
            cos.iter_mut().zip(&f.cos).for_each(|(a, b)| *a += w * b);
            sin.iter_mut().zip(&f.sin).for_each(|(a, b)| *a += w * b);
        }
        HarmonicFunction::new(cos, sin)
    }
}

/// Equality of the represented functions: trailing zero coefficients are
/// ignored.
impl PartialEq for HarmonicFunction {
    fn eq(&self, other: &Self) -> bool {
        fn same(a: &[f64], b: &[f64]) -> bool {
            let len = a.len().max(b.len());
            (0..len).all(|i| a.get(i).copied().unwrap_or(0.0) == b.get(i).copied().unwrap_or(0.0))
        }
        same(&self.cos, &other.cos) && same(&self.sin, &other.sin)
    }
}

/// Maps even/odd coefficient sequences to a function: `c_k = v_E[k]`,
/// `s_k = v_O[k − 1]`. Norm-preserving.
pub fn from_even_odd(even: &[f64], odd: &[f64]) -> HarmonicFunction {
    HarmonicFunction::new(even.to_vec(), odd.to_vec())
}

/// `(1/M) Σ_{j<M} g(j/M)`, the trapezoid rule for a 1-periodic integrand.
pub fn periodic_trapezoid(points: usize, g: impl Fn(f64) -> f64) -> f64 {
    (0..points).map(|j| g(j as f64 / points as f64)).sum::<f64>() / points as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn evaluate_examples() {
        let one = HarmonicFunction::constant(1.0);
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(one.evaluate(t).unwrap(), 1.0);
        }
        assert!(close(HarmonicFunction::cosine(1).evaluate(0.0).unwrap(), SQRT_2, 1e-15));
        assert!(close(HarmonicFunction::sine(1).evaluate(0.25).unwrap(), SQRT_2, 1e-15));
        assert!(one.evaluate(1.5).is_err());
        assert!(one.evaluate(-1e-9).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let c1 = HarmonicFunction::cosine(1);
        assert_eq!(HarmonicFunction::constant(1.0).inner_product(&c1), 0.0);
        assert_eq!(c1.inner_product(&c1), 1.0);
    }

    #[test]
    fn mqv_examples() {
        assert_eq!(HarmonicFunction::constant(3.0).mqv(), 0.0);
        assert!(close(HarmonicFunction::cosine(1).mqv(), 4.0 * PI * PI, 1e-12));
        assert!(close(HarmonicFunction::cosine(2).mqv(), 16.0 * PI * PI, 1e-12));
    }

    #[test]
    fn ssqv_examples() {
        for alpha in [0.1, 1.0, 7.0] {
            assert_eq!(HarmonicFunction::zero().ssqv(alpha).unwrap(), 0.0);
            assert_eq!(HarmonicFunction::constant(1.0).ssqv(alpha).unwrap(), 2.0);
            assert!(close(HarmonicFunction::cosine(1).ssqv(alpha).unwrap(), alpha + 2.0, 1e-14));

            assert!(close(HarmonicFunction::constant(1.0).ssqv_spatial(alpha, 64).unwrap(), 2.0, 1e-9));
            assert!(close(HarmonicFunction::cosine(1).ssqv_spatial(alpha, 64).unwrap(), alpha + 2.0, 1e-9));
            assert_eq!(HarmonicFunction::zero().ssqv_spatial(alpha, 64).unwrap(), 0.0);
        }
        assert!(HarmonicFunction::constant(1.0).ssqv(0.0).is_err());
        assert!(HarmonicFunction::cosine(4).ssqv_spatial(1.0, 23).is_err());
    }

    #[test]
    fn even_odd_examples() {
        assert_eq!(from_even_odd(&[1.0], &[]), HarmonicFunction::constant(1.0));
        assert_eq!(from_even_odd(&[0.0, 1.0], &[]), HarmonicFunction::cosine(1));
        assert_eq!(from_even_odd(&[], &[1.0]), HarmonicFunction::sine(1));
    }

    fn arb_function(max_degree: usize) -> impl Strategy<Value = HarmonicFunction> {
        (0..=max_degree).prop_flat_map(|k| {
            (prop::collection::vec(-1.0f64..1.0, k + 1), prop::collection::vec(-1.0f64..1.0, k))
                .prop_map(|(c, s)| HarmonicFunction::new(c, s))
        })
    }

    proptest! {
        #[test]
        fn parseval_matches_quadrature(f in arb_function(64), g in arb_function(64)) {
            let quad = periodic_trapezoid(4096, |t| f.eval_periodic(t) * g.eval_periodic(t));
            prop_assert!((f.inner_product(&g) - quad).abs() < 1e-9);
        }

        #[test]
        fn spectral_and_spatial_ssqv_agree(f in arb_function(64), alpha in prop::sample::select(vec![0.1, 1.0, 10.0])) {
            let spectral = f.ssqv(alpha).unwrap();
            let spatial = f.ssqv_spatial(alpha, 4096).unwrap();
            prop_assert!((spectral - spatial).abs() < 1e-6 * (1.0 + spectral));
        }

        #[test]
        fn mqv_vanishes_only_for_constants(f in arb_function(8)) {
            let q = f.mqv();
            prop_assert!(q >= 0.0);
            let nonconstant = f.cos_coeffs()[1..].iter().chain(f.sin_coeffs()).any(|c| *c != 0.0);
            prop_assert_eq!(q > 0.0, nonconstant);
        }

        #[test]
        fn even_odd_is_isometric(e in prop::collection::vec(-5.0f64..5.0, 0..20), o in prop::collection::vec(-5.0f64..5.0, 0..20)) {
            let f = from_even_odd(&e, &o);
            let direct: f64 = e.iter().chain(&o).map(|x| x * x).sum();
            prop_assert!((f.norm_sq() - direct).abs() <= 1e-12 * (1.0 + direct));
        }
    }
}
