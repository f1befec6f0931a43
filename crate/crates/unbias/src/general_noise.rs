//! Unbiased polynomial estimation under arbitrary additive noise with known
//! moments.
//!
//! If x̃ = q + Z with E[Z^r] = μ_r known for r up to the target degree, then
//! E[x̃^n] = Σ_j C(n,j)·μ_{n−j}·q^j is a triangular linear relation between
//! the coefficients of any polynomial estimator g and the polynomial (in q)
//! it unbiasedly estimates. Inverting that relation by back-substitution
//! gives the closed-form debiased estimator; independence makes the
//! multivariate case a plain product.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::function_model::Polynomial;

pub const MAX_MOMENT_DEGREE: usize = 16;

/// Upper-triangular moment matrix M[j][n] = C(n, j)·μ_{n−j} with unit
/// diagonal; maps estimator coefficients a to the coefficients of
/// q ↦ E[Σ a_n (q+Z)^n].
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    m: DMatrix<f64>,
}

fn binomial_table(p: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; p + 1]; p + 1];
    for n in 0..=p {
        c[n][0] = 1.0;
        for j in 1..=n {
            c[n][j] = c[n - 1][j - 1] + if j <= n - 1 { c[n - 1][j] } else { 0.0 };
        }
    }
    c
}

impl MomentMatrix {
    pub fn new(mu: &[f64]) -> Result<Self> {
        match mu.first() {
            Some(&m0) if (m0 - 1.0).abs() <= 1e-12 => {}
            _ => {
                return Err(Error::Invalid(
                    "moment vector must start with μ_0 = 1".to_string(),
                ))
            }
        }
        let p = mu.len() - 1;
        if p > MAX_MOMENT_DEGREE {
            return Err(Error::DegreeCap { degree: p, cap: MAX_MOMENT_DEGREE });
        }
        let binom = binomial_table(p);
        let m = DMatrix::from_fn(p + 1, p + 1, |j, n| {
            if n < j { 0.0 } else { binom[n][j] * mu[n - j] }
        });
        Ok(MomentMatrix { m })
    }

    /// Matrix dimension p + 1.
    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, j: usize, n: usize) -> f64 {
        self.m[(j, n)]
    }

    /// Apply M to a coefficient vector: the polynomial in q that Σ a_n x̃^n
    /// estimates in expectation.
    pub fn expectation_coeffs(&self, a: &[f64]) -> Vec<f64> {
        let p = self.size() - 1;
        (0..=p)
            .map(|j| (j..=p).map(|n| self.m[(j, n)] * a.get(n).copied().unwrap_or(0.0)).sum())
            .collect()
    }

    /// ∞-norm condition estimate of the triangular system.
    pub fn condition_estimate(&self) -> f64 {
        let p = self.size() - 1;
        let norm = |mat: &DMatrix<f64>| -> f64 {
            (0..=p)
                .map(|i| (0..=p).map(|j| mat[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let inv = self
            .m
            .clone()
            .try_inverse()
            .unwrap_or_else(|| DMatrix::from_element(p + 1, p + 1, f64::INFINITY));
        norm(&self.m) * norm(&inv)
    }
}

/// Coefficients of the unbiased polynomial estimator: solves M·a = target
/// coefficients by back-substitution on the unit-diagonal triangle.
pub fn debias_coeffs(target: &Polynomial, mu: &[f64]) -> Result<Polynomial> {
    let mm = MomentMatrix::new(mu)?;
    let p = mm.size() - 1;
    if target.degree().unwrap_or(0) > p {
        return Err(Error::Invalid(format!(
            "need moments up to the target degree: degree {} vs {} moments",
            target.degree().unwrap_or(0),
            mu.len()
        )));
    }
    let mut a = vec![0.0; p + 1];
    for n in (0..=p).rev() {
        let tail: f64 = (n + 1..=p).map(|m| mm.entry(n, m) * a[m]).sum();
        a[n] = target.coeff(n) - tail;
    }
    Ok(Polynomial::new(a))
}

/// Debiased estimate at a single noisy observation.
pub fn debias_eval(target: &Polynomial, mu: &[f64], x_tilde: f64) -> Result<f64> {
    Ok(debias_coeffs(target, mu)?.eval(x_tilde))
}

/// Product estimator for Π_i target_i(q_i) from independently noised
/// coordinates.
pub fn multivariate_debias(
    targets: &[(Polynomial, Vec<f64>)],
    x_tildes: &[f64],
) -> Result<f64> {
    if targets.len() != x_tildes.len() {
        return Err(Error::Invalid(format!(
            "{} targets but {} observations",
            targets.len(),
            x_tildes.len()
        )));
    }
    targets
        .iter()
        .zip(x_tildes)
        .map(|((t, mu), &x)| debias_eval(t, mu, x))
        .product::<Result<f64>>()
}
