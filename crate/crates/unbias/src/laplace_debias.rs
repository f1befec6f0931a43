//! Closed-form debiasing of f(x̃) when x̃ = q + Laplace(b).
//!
//! For twice-differentiable f of polynomial growth, f(x̃) − b²·f″(x̃) has
//! expectation exactly f(q); `LaplaceEstimator` packages that correction.
//! The absolute-value plug-in (which has no such correction) gets explicit
//! bias helpers instead.

use crate::error::{Error, Result};
use crate::function_model::SmoothFunction;
use crate::noise::RngStream;

/// Unbiased estimator of f(q) from a single Laplace-noised observation.
#[derive(Debug, Clone)]
pub struct LaplaceEstimator {
    f: SmoothFunction,
    b: f64,
}

impl LaplaceEstimator {
    pub fn new(f: SmoothFunction, b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParams {
                name: f.name(),
                reason: format!("noise scale must be > 0, got {b}"),
            });
        }
        if !f.twice_differentiable() {
            return Err(Error::NotTwiceDifferentiable { name: f.name() });
        }
        if !f.polynomial_growth() {
            return Err(Error::InvalidParams {
                name: f.name(),
                reason: "second-order correction requires polynomial growth".to_string(),
            });
        }
        Ok(LaplaceEstimator { f, b })
    }

    pub fn f(&self) -> &SmoothFunction {
        &self.f
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// f(x̃) − b²·f″(x̃).
    pub fn estimate(&self, x_tilde: f64) -> f64 {
        self.f.value_at(x_tilde) - self.b * self.b * self.f.d2_at(x_tilde)
    }
}

/// Degree-k monomial shortcut: x̃^k − b²·k(k−1)·x̃^{k−2}.
pub fn power_estimate(k: u32, b: f64, x_tilde: f64) -> f64 {
    if k < 2 {
        return x_tilde.powi(k as i32);
    }
    x_tilde.powi(k as i32)
        - b * b * (k * (k - 1)) as f64 * x_tilde.powi(k as i32 - 2)
}

/// Exact bias of the plug-in |x̃| for |q|: E[|q + Z|] − |q| = b·e^{−|q|/b}.
pub fn plug_in_bias_abs(q: f64, b: f64) -> f64 {
    b * (-q.abs() / b).exp()
}

/// Monte Carlo bias of the plug-in f(x̃) for f(q), with its standard error.
pub fn plug_in_bias_mc(
    f: &SmoothFunction,
    q: f64,
    b: f64,
    n: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if n < 10_000 {
        return Err(Error::Invalid(format!(
            "plug-in bias needs at least 10^4 draws for a usable SE, got {n}"
        )));
    }
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n {
        let v = f.value_at(q + rng.laplace(b));
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n as f64;
    let var = (sumsq / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0);
    Ok((mean - f.value_at(q), (var / n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_model::builtin;

    #[test]
    fn frozen_estimates() {
        let sq = LaplaceEstimator::new(builtin("power", &[2.0]).unwrap(), 1.0).unwrap();
        assert_eq!(sq.estimate(3.0), 7.0);

        let id = LaplaceEstimator::new(builtin("identity", &[1.0]).unwrap(), 5.0).unwrap();
        assert_eq!(id.estimate(-4.0), -4.0);

        let cs = LaplaceEstimator::new(builtin("cos", &[1.0]).unwrap(), 0.5).unwrap();
        assert!((cs.estimate(0.0) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn frozen_power_estimates() {
        assert_eq!(power_estimate(1, 3.0, 7.0), 7.0);
        assert_eq!(power_estimate(2, 1.0, 0.0), -2.0);
    }

    #[test]
    fn abs_is_rejected_with_pointer_to_bias_helpers() {
        let err = LaplaceEstimator::new(builtin("abs", &[]).unwrap(), 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("plug_in_bias"), "unhelpful message: {msg}");
    }

    #[test]
    fn frozen_abs_bias() {
        assert_eq!(plug_in_bias_abs(0.0, 1.0), 1.0);
        assert!((plug_in_bias_abs(1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!(plug_in_bias_abs(20.0, 1.0) < 1e-8);
    }

    #[test]
    fn cube_estimate_is_unbiased_mc() {
        // k = 3, b = 0.5, q = 2: mean of the corrected estimate over noise
        // should recover q³ = 8.
        let (k, b, q) = (3u32, 0.5f64, 2.0f64);
        let s = crate::mc::mc_stats(1_000_000, 313, 0, |rng| {
            power_estimate(k, b, q + rng.laplace(b))
        });
        assert!(
            (s.mean - 8.0).abs() <= 4.0 * s.se,
            "mean {} se {}",
            s.mean,
            s.se
        );
    }

    #[test]
    fn mc_bias_matches_closed_form_for_abs() {
        let f = builtin("abs", &[]).unwrap();
        let mut rng = RngStream::new(77, 0);
        let (bias, se) = plug_in_bias_mc(&f, 1.0, 1.0, 200_000, &mut rng).unwrap();
        let exact = plug_in_bias_abs(1.0, 1.0);
        assert!((bias - exact).abs() <= 4.0 * se, "bias {bias} vs {exact} (se {se})");
        assert!(plug_in_bias_mc(&f, 0.0, 1.0, 100, &mut rng).is_err());
    }
}
