//! Optimal polynomial extension of a function known to be smooth on [L, ∞).
//!
//! For x̃ = q + Laplace(b) with q ≥ L, the corrected plug-in f(x̃) − b²f″(x̃)
//! needs f off the domain whenever x̃ < L. This module replaces f below L
//! with a degree-k polynomial h that pastes twice-differentiably at L and
//! minimizes the prior-weighted expected squared error of the resulting
//! estimator g = h − b²h″ over the left region. The minimization is an
//! equality-constrained convex quadratic program; the three pasting
//! constraints are eliminated by a linear solve, leaving an unconstrained
//! quadratic in the k−2 free coefficients which one Newton step solves
//! exactly.
//!
//! All internal linear algebra runs in the shifted/scaled coordinate
//! u = (x − L)/b, where the exponential-moment matrix is far better
//! conditioned than in raw x; results are mapped back to raw coefficients.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::function_model::{Polynomial, SmoothFunction};
use crate::quadrature;

pub const MAX_DEGREE: usize = 30;

/// ∫_{−∞}^L x^m e^{(x−L)/b} dx, exactly, via integration by parts:
/// M_0 = b and M_m = b·(L^m − m·M_{m−1}).
pub fn tail_moment(m: usize, lower: f64, b: f64) -> f64 {
    let mut acc = b;
    for j in 1..=m {
        acc = b * (lower.powi(j as i32) - j as f64 * acc);
    }
    acc
}

/// Weighting measure over the true statistic q, supported on [L, ∞).
#[derive(Debug, Clone, PartialEq)]
pub enum PriorMeasure {
    Discrete { points: Vec<(f64, f64)> },
    Uniform { lo: f64, hi: f64 },
}

impl PriorMeasure {
    /// Weighted atoms (value, weight); weights are normalized to sum to 1.
    pub fn discrete(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("discrete prior needs at least one atom".into()));
        }
        let total: f64 = points.iter().map(|(_, w)| w).sum();
        if !points.iter().all(|(q, w)| q.is_finite() && *w > 0.0) || !total.is_finite() {
            return Err(Error::Invalid(
                "discrete prior atoms must be finite with positive weights".into(),
            ));
        }
        Ok(PriorMeasure::Discrete {
            points: points.into_iter().map(|(q, w)| (q, w / total)).collect(),
        })
    }

    pub fn atom(q: f64) -> Result<Self> {
        PriorMeasure::discrete(vec![(q, 1.0)])
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Invalid(format!(
                "uniform prior needs finite hi > lo, got [{lo}, {hi}]"
            )));
        }
        Ok(PriorMeasure::Uniform { lo, hi })
    }

    pub fn min_support(&self) -> f64 {
        match self {
            PriorMeasure::Discrete { points } => {
                points.iter().map(|(q, _)| *q).fold(f64::INFINITY, f64::min)
            }
            PriorMeasure::Uniform { lo, .. } => *lo,
        }
    }

    /// (E[e^{(L−q)/b}], E[f(q)e^{(L−q)/b}], E[f(q)²e^{(L−q)/b}]) under the
    /// prior. Discrete priors are exact sums; for uniform priors the plain
    /// exponential factor is closed-form and the f-weighted factors use
    /// adaptive quadrature at relative tolerance 1e−10.
    fn weight_factors(&self, f: &SmoothFunction, lower: f64, b: f64) -> Result<(f64, f64, f64)> {
        match self {
            PriorMeasure::Discrete { points } => {
                let mut w = 0.0;
                let mut fw = 0.0;
                let mut f2w = 0.0;
                for &(q, wt) in points {
                    let e = wt * ((lower - q) / b).exp();
                    let fq = f.value_at(q);
                    w += e;
                    fw += e * fq;
                    f2w += e * fq * fq;
                }
                Ok((w, fw, f2w))
            }
            PriorMeasure::Uniform { lo, hi } => {
                let width = hi - lo;
                let w = b * (((lower - lo) / b).exp() - ((lower - hi) / b).exp()) / width;
                let fw = quadrature::integrate(
                    |q| f.value_at(q) * ((lower - q) / b).exp(),
                    *lo,
                    *hi,
                    1e-10,
                )? / width;
                let f2w = quadrature::integrate(
                    |q| {
                        let v = f.value_at(q);
                        v * v * ((lower - q) / b).exp()
                    },
                    *lo,
                    *hi,
                    1e-10,
                )? / width;
                Ok((w, fw, f2w))
            }
        }
    }
}

/// A fully specified extension problem: extend `f` below `lower` by a
/// degree-`k` polynomial under Laplace(`b`) noise, weighting true values by
/// `prior`.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    f: SmoothFunction,
    lower: f64,
    k: usize,
    b: f64,
    prior: PriorMeasure,
}

impl ExtensionProblem {
    pub fn new(
        f: SmoothFunction,
        lower: f64,
        k: usize,
        b: f64,
        prior: PriorMeasure,
    ) -> Result<Self> {
        if !f.twice_differentiable() {
            return Err(Error::NotTwiceDifferentiable { name: f.name() });
        }
        if k < 2 {
            return Err(Error::InvalidParams {
                name: f.name(),
                reason: format!("three pasting constraints need degree ≥ 2, got k = {k}"),
            });
        }
        if k > MAX_DEGREE {
            return Err(Error::DegreeCap { degree: k, cap: MAX_DEGREE });
        }
        if !(b > 0.0) || !lower.is_finite() {
            return Err(Error::InvalidParams {
                name: f.name(),
                reason: format!("need finite boundary and noise scale > 0, got L = {lower}, b = {b}"),
            });
        }
        let targets = [f.value_at(lower), f.d1_at(lower), f.d2_at(lower)];
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParams {
                name: f.name(),
                reason: format!("f must be twice differentiable at the boundary {lower}"),
            });
        }
        if prior.min_support() < lower {
            return Err(Error::Invalid(format!(
                "prior support reaches {} below the boundary {lower}",
                prior.min_support()
            )));
        }
        Ok(ExtensionProblem { f, lower, k, b, prior })
    }

    pub fn f(&self) -> &SmoothFunction {
        &self.f
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn prior(&self) -> &PriorMeasure {
        &self.prior
    }
}

/// Constraint-eliminated quadratic form of the extension objective.
///
/// The estimator over the left region is expressed in the factorial basis
/// ψ_i(u) = u^i/i! of the shifted coordinate u = (x − L)/b, whose
/// exponential-weight Gram matrix consists of signed binomial coefficients.
/// That keeps every matrix entry ≤ C(2k, k) instead of (2k)!, which is
/// what makes an accurate gradient at the optimum possible at all.
///
/// Free variables are the basis coefficients with index 3..k; the three
/// dependent ones are the affine function `dependent_at` of the free
/// vector. `objective_at`/`gradient_at` evaluate the true
/// expected-squared-error objective and its gradient in these variables.
#[derive(Debug, Clone)]
pub struct ReducedQp {
    lower: f64,
    b: f64,
    k: usize,
    q_mat: DMatrix<f64>,
    c: DVector<f64>,
    const_term: f64,
    dep_at_zero: DVector<f64>,
    dep_map: DMatrix<f64>,
}

/// Gram matrix of ψ_i under e^u on (−∞, 0]:
/// ∫ ψ_i ψ_j e^u du = (−1)^{i+j}·C(i+j, i).
fn factorial_basis_gram(k: usize) -> DMatrix<f64> {
    let mut binom = vec![vec![0.0f64; k + 1]; 2 * k + 1];
    for (n, row) in binom.iter_mut().enumerate() {
        row[0] = 1.0;
        for j in 1..=k.min(n) {
            row[j] = row[j - 1] * (n - j + 1) as f64 / j as f64;
        }
    }
    DMatrix::from_fn(k + 1, k + 1, |i, j| {
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * binom[i + j][i.min(j)]
    })
}

/// Rows mapping factorial-basis estimator coefficients to the pasting
/// values (h(L), b·h′(L), b²·h″(L)). In this basis the triangular
/// estimator↔extension relation collapses to suffix sums, so the rows are
/// parity indicators.
fn constraint_matrix(k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(3, k + 1, |r, j| {
        let hit = match r {
            0 => j % 2 == 0,
            1 => j % 2 == 1,
            _ => j >= 2 && j % 2 == 0,
        };
        if hit {
            1.0
        } else {
            0.0
        }
    })
}

pub fn build_reduced_qp(p: &ExtensionProblem) -> Result<ReducedQp> {
    let (k, b, lower) = (p.k, p.b, p.lower);
    let (w, fw, f2w) = p.prior.weight_factors(&p.f, lower, b)?;

    let a_mat = factorial_basis_gram(k) * w;
    // ∫ ψ_i e^u du = (−1)^i.
    let r = DVector::from_fn(k + 1, |i, _| fw * if i % 2 == 0 { 1.0 } else { -1.0 });

    let cons = constraint_matrix(k);
    let c_dep = cons.columns(0, 3).into_owned();
    let targets = DVector::from_column_slice(&[
        p.f.value_at(lower),
        b * p.f.d1_at(lower),
        b * b * p.f.d2_at(lower),
    ]);
    let dep_lu = c_dep.lu();
    let dep_at_zero = dep_lu
        .solve(&targets)
        .ok_or_else(|| Error::Invalid("constraint block is singular".into()))?;

    let nfree = k - 2;
    let c_free = cons.columns(3, nfree).into_owned();
    let dep_map = -dep_lu
        .solve(&c_free)
        .ok_or_else(|| Error::Invalid("constraint block is singular".into()))?;

    // Coefficient vector as a function of the free part: a(y) = p0 + P·y
    // with p0 = [dep_at_zero; 0], P = [dep_map; I].
    let mut p0 = DVector::zeros(k + 1);
    p0.rows_mut(0, 3).copy_from(&dep_at_zero);
    let mut p_full = DMatrix::zeros(k + 1, nfree);
    p_full.rows_mut(0, 3).copy_from(&dep_map);
    for j in 0..nfree {
        p_full[(3 + j, j)] = 1.0;
    }

    let q_mat = p_full.transpose() * &a_mat * &p_full;
    let c = p_full.transpose() * (&a_mat * &p0 - &r);
    let const_term = 0.5 * (p0.transpose() * &a_mat * &p0)[(0, 0)] - r.dot(&p0) + 0.5 * f2w;

    Ok(ReducedQp {
        lower,
        b,
        k,
        q_mat: 0.5 * (&q_mat + q_mat.transpose()),
        c,
        const_term,
        dep_at_zero,
        dep_map,
    })
}

impl ReducedQp {
    pub fn free_dim(&self) -> usize {
        self.k - 2
    }

    pub fn q_matrix(&self) -> &DMatrix<f64> {
        &self.q_mat
    }

    pub fn c_vector(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn const_term(&self) -> f64 {
        self.const_term
    }

    /// The three dependent basis coefficients implied by the free vector.
    pub fn dependent_at(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.dep_at_zero + &self.dep_map * y
    }

    pub fn objective_at(&self, y: &DVector<f64>) -> f64 {
        0.5 * (y.transpose() * &self.q_mat * y)[(0, 0)] + self.c.dot(y) + self.const_term
    }

    pub fn gradient_at(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.q_mat * y + &self.c
    }

    fn basis_coeffs_at(&self, y: &DVector<f64>) -> Vec<f64> {
        let dep = self.dependent_at(y);
        let mut a = vec![0.0; self.k + 1];
        for i in 0..3.min(self.k + 1) {
            a[i] = dep[i];
        }
        for j in 0..y.len() {
            a[3 + j] = y[j];
        }
        a
    }

    /// Extension polynomial h in raw x-coordinates at the given free vector.
    ///
    /// In the factorial basis the estimator↔extension relation is the suffix
    /// sum ȟ_i = ǎ_i + ȟ_{i+2}; dividing by i! recovers monomial
    /// u-coefficients, and the linear substitution u = (x − L)/b recovers x.
    pub fn h_raw_at(&self, y: &DVector<f64>) -> Polynomial {
        let a = self.basis_coeffs_at(y);
        let k = self.k;
        let mut h = vec![0.0; k + 1];
        for i in (0..=k).rev() {
            h[i] = a[i] + if i + 2 <= k { h[i + 2] } else { 0.0 };
        }
        let mut fact = 1.0;
        for (i, hi) in h.iter_mut().enumerate() {
            if i > 0 {
                fact *= i as f64;
            }
            *hi /= fact;
        }
        Polynomial::new(h).substitute_linear(1.0 / self.b, -self.lower / self.b)
    }
}

/// Solved extension: the pasted polynomial `h`, the left-region estimator
/// `g = h − b²h″`, and the attained objective.
#[derive(Debug, Clone)]
pub struct ExtensionSolution {
    g: Polynomial,
    h: Polynomial,
    objective: f64,
    grad_norm: f64,
    problem: ExtensionProblem,
    least_norm_fallback: bool,
    condition_estimate: f64,
}

fn g_from_h(h: &Polynomial, b: f64) -> Polynomial {
    let hc = h.coeffs();
    let mut a = hc.to_vec();
    for i in 0..hc.len() {
        if i + 2 < hc.len() {
            a[i] -= b * b * ((i + 2) * (i + 1)) as f64 * hc[i + 2];
        }
    }
    Polynomial::new(a)
}

pub fn solve(p: &ExtensionProblem) -> Result<ExtensionSolution> {
    let qp = build_reduced_qp(p)?;
    let nfree = qp.free_dim();

    let mut least_norm_fallback = false;
    let mut condition_estimate = 1.0;
    let y = if nfree == 0 {
        DVector::zeros(0)
    } else {
        let svd = qp.q_mat.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        condition_estimate = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        match qp.q_mat.clone().cholesky() {
            Some(chol) if condition_estimate < 1e14 => chol.solve(&(-&qp.c)),
            _ => {
                least_norm_fallback = true;
                svd.solve(&(-&qp.c), smax * 1e-13)
                    .map_err(|e| Error::Invalid(format!("degenerate quadratic form: {e}")))?
            }
        }
    };

    let grad_norm = qp.gradient_at(&y).norm();
    let objective = qp.objective_at(&y);
    let h = qp.h_raw_at(&y);
    let g = g_from_h(&h, p.b);

    Ok(ExtensionSolution {
        g,
        h,
        objective,
        grad_norm,
        problem: p.clone(),
        least_norm_fallback,
        condition_estimate,
    })
}

/// The degree-2 pasted extension (free coefficients zero): h is the
/// second-order Taylor polynomial of f at the boundary. Used as the
/// feasible reference the optimum must dominate.
pub fn taylor_solution(p: &ExtensionProblem) -> Result<ExtensionSolution> {
    let qp = build_reduced_qp(p)?;
    let y = DVector::zeros(qp.free_dim());
    let h = qp.h_raw_at(&y);
    Ok(ExtensionSolution {
        g: g_from_h(&h, p.b),
        h,
        objective: qp.objective_at(&y),
        grad_norm: qp.gradient_at(&y).norm(),
        problem: p.clone(),
        least_norm_fallback: false,
        condition_estimate: 1.0,
    })
}

impl ExtensionSolution {
    pub fn g(&self) -> &Polynomial {
        &self.g
    }

    pub fn h(&self) -> &Polynomial {
        &self.h
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad_norm
    }

    pub fn problem(&self) -> &ExtensionProblem {
        &self.problem
    }

    pub fn least_norm_fallback(&self) -> bool {
        self.least_norm_fallback
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Pointwise estimator value: the polynomial g below the boundary,
    /// f − b²f″ above it.
    pub fn estimate(&self, x_tilde: f64) -> f64 {
        let p = &self.problem;
        if x_tilde <= p.lower {
            self.g.eval(x_tilde)
        } else {
            p.f.value_at(x_tilde) - p.b * p.b * p.f.d2_at(x_tilde)
        }
    }

    /// E[(estimate(q + Z) − shift)^m] for m = 1, 2: the polynomial region
    /// integrates exactly through tail moments, the smooth region by
    /// adaptive quadrature split at q and truncated at q + 60b.
    fn noise_moment(&self, q: f64, shift: f64, m: u32) -> Result<f64> {
        let p = &self.problem;
        let (lower, b) = (p.lower, p.b);

        let shifted = self.g.sub_const(shift);
        let pow = if m == 2 { shifted.mul(&shifted) } else { shifted };
        let coeffs = pow.coeffs();
        let poly_part: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(j, &cj)| cj * tail_moment(j, lower, b))
            .sum();
        let left = ((lower - q) / b).exp() / (2.0 * b) * poly_part;

        let integrand = |x: f64| {
            let v = p.f.value_at(x) - b * b * p.f.d2_at(x) - shift;
            let dens = (-(x - q).abs() / b).exp() / (2.0 * b);
            if m == 2 { v * v * dens } else { v * dens }
        };
        let right = quadrature::integrate(&integrand, lower, q, 1e-11)?
            + quadrature::integrate(&integrand, q, q + 60.0 * b, 1e-11)?;
        Ok(left + right)
    }

    /// E[estimate(q + Z)]; equals f(q) up to integration tolerance for
    /// every q at or above the boundary.
    pub fn estimator_expectation(&self, q: f64) -> Result<f64> {
        if q < self.problem.lower {
            return Err(Error::Invalid(format!(
                "expectation defined for q ≥ {}, got {q}",
                self.problem.lower
            )));
        }
        self.noise_moment(q, 0.0, 1)
    }

    /// V[estimate(q + Z)] = E[(estimate − E[estimate])²], nonnegative.
    pub fn estimator_variance(&self, q: f64) -> Result<f64> {
        if q < self.problem.lower {
            return Err(Error::Invalid(format!(
                "variance defined for q ≥ {}, got {q}",
                self.problem.lower
            )));
        }
        let mean = self.noise_moment(q, 0.0, 1)?;
        Ok(self.noise_moment(q, mean, 2)?.max(0.0))
    }
}
