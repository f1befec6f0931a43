//! Randomized structural properties, checked with proptest.

use proptest::prelude::*;

use unbias::extension_optimizer::{solve, tail_moment, ExtensionProblem, PriorMeasure};
use unbias::function_model::{Polynomial, SmoothFunction};
use unbias::general_noise::{debias_coeffs, MomentMatrix};
use unbias::mean_mechanisms::{Dataset, MssParams};
use unbias::noise::{laplace_moments, RngStream};
use unbias::prdp::{policy, TransformSpec};
use unbias::quadrature::integrate;

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, 1..max_len)
}

proptest! {
    /// Multiplication and evaluation commute.
    #[test]
    fn polynomial_product_evaluates(a in coeffs(8), b in coeffs(8), x in -3.0..3.0f64) {
        let p = Polynomial::new(a);
        let q = Polynomial::new(b);
        let lhs = p.mul(&q).eval(x);
        let rhs = p.eval(x) * q.eval(x);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    /// Composition with s·x + t and evaluation commute.
    #[test]
    fn substitution_evaluates(
        a in coeffs(8),
        s in -2.0..2.0f64,
        t in -3.0..3.0f64,
        x in -2.0..2.0f64,
    ) {
        let p = Polynomial::new(a);
        let lhs = p.substitute_linear(s, t).eval(x);
        let rhs = p.eval(s * x + t);
        prop_assert!((lhs - rhs).abs() <= 1e-7 * (1.0 + rhs.abs()));
    }

    /// Differentiation is linear.
    #[test]
    fn derivative_is_linear(a in coeffs(9), b in coeffs(9), w in -4.0..4.0f64) {
        let p = Polynomial::new(a);
        let q = Polynomial::new(b);
        let lhs = p.add_scaled(w, &q).derivative(1);
        let rhs = p.derivative(1).add_scaled(w, &q.derivative(1));
        for i in 0..lhs.coeffs().len().max(rhs.coeffs().len()) {
            prop_assert!((lhs.coeff(i) - rhs.coeff(i)).abs() <= 1e-9 * (1.0 + rhs.coeff(i).abs()));
        }
    }

    /// Debiasing then taking the noise expectation returns the target, and
    /// under Laplace moments it equals the closed-form second-order
    /// correction.
    #[test]
    fn debias_inverts_expectation(a in coeffs(9), b in 0.2..2.0f64) {
        let target = Polynomial::new(a);
        let deg = target.coeffs().len() - 1;
        let mu = laplace_moments(b, deg);
        let g = debias_coeffs(&target, &mu).unwrap();

        let back = MomentMatrix::new(&mu).unwrap().expectation_coeffs(g.coeffs());
        let closed = target.add_scaled(-b * b, &target.derivative(2));
        let scale = 1.0 + target.coeffs().iter().fold(0.0f64, |m, &c| m.max(c.abs()));
        for i in 0..=deg {
            prop_assert!((back[i] - target.coeff(i)).abs() <= 1e-9 * scale);
            prop_assert!((g.coeff(i) - closed.coeff(i)).abs() <= 1e-9 * scale);
        }
    }

    /// Even Laplace moments follow (2r)!·b^{2r}; odd moments vanish.
    #[test]
    fn laplace_moments_closed_form(b in 0.1..3.0f64) {
        let mu = laplace_moments(b, 12);
        for r in 0..=6usize {
            let factorial: f64 = (1..=2 * r).map(|i| i as f64).product();
            let want = factorial * b.powi(2 * r as i32);
            prop_assert!((mu[2 * r] - want).abs() <= 1e-9 * want.max(1.0));
            if r > 0 {
                prop_assert_eq!(mu[2 * r - 1], 0.0);
            }
        }
    }

    /// The closed-form exponential-weight moments agree with quadrature.
    #[test]
    fn tail_moment_matches_quadrature(
        m in 0usize..6,
        lower in -2.0..4.0f64,
        b in 0.3..2.5f64,
    ) {
        let closed = tail_moment(m, lower, b);
        let direct = integrate(
            |x| x.powi(m as i32) * ((x - lower) / b).exp(),
            lower - 45.0 * b,
            lower,
            1e-10,
        )
        .unwrap();
        prop_assert!((closed - direct).abs() <= 1e-8 * (1.0 + closed.abs()));
    }

    /// The privacy-loss policy is nondecreasing and midpoint-concave in the
    /// contribution bound.
    #[test]
    fn policy_shape(
        k in 1u32..=3,
        a in 0.0..3.0f64,
        b in 0.1..2.0f64,
        r1 in 0.0..50.0f64,
        r2 in 0.0..50.0f64,
    ) {
        let spec = TransformSpec::kth_root(k, a, b).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let p_lo = policy(lo, &spec).unwrap();
        let p_hi = policy(hi, &spec).unwrap();
        prop_assert!(p_lo <= p_hi + 1e-12);
        let mid = policy(0.5 * (lo + hi), &spec).unwrap();
        prop_assert!(mid >= 0.5 * (p_lo + p_hi) - 1e-9 * (1.0 + p_hi));
    }

    /// Any (β, τ) split satisfying the budget identity is accepted.
    #[test]
    fn mss_budget_identity(beta in 1e-4..1.0f64, tau in 0.05..20.0f64) {
        let eps2 = 4.0 * beta + 2.0 / (3.0f64.sqrt() * tau);
        prop_assert!(MssParams::new(1.0, eps2, beta, tau).is_ok());
        prop_assert!(MssParams::new(1.0, eps2 * 1.5, beta, tau).is_err());
    }

    /// Dataset sums outside [0, n] never construct.
    #[test]
    fn dataset_bounds(n in 0u64..10_000, s in -50.0..10_050.0f64) {
        let ok = Dataset::new(n, s).is_ok();
        prop_assert_eq!(ok, (0.0..=n as f64).contains(&s));
    }

    /// Distinct stream ids under one seed give distinct draws; the same
    /// stream reproduces exactly.
    #[test]
    fn rng_streams_are_addressable(seed in any::<u64>(), stream in 0u64..1000) {
        let mut a = RngStream::new(seed, stream);
        let mut b = RngStream::new(seed, stream);
        prop_assert_eq!(a.uniform(), b.uniform());
        let mut c = RngStream::new(seed, stream + 1);
        prop_assert_ne!(a.uniform(), c.uniform());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The solved estimator pastes continuously at the boundary: the
    /// polynomial branch meets the closed-form branch.
    #[test]
    fn estimator_is_continuous_at_boundary(
        k in 2usize..=8,
        l in 0.5..3.0f64,
        b in 0.3..2.0f64,
        spread in 1.0..80.0f64,
    ) {
        let p = ExtensionProblem::new(
            SmoothFunction::inverse(),
            l,
            k,
            b,
            PriorMeasure::uniform(l, l + spread).unwrap(),
        )
        .unwrap();
        let sol = solve(&p).unwrap();
        let left = sol.g().eval(l);
        let right = p.f().value_at(l) - b * b * p.f().d2_at(l);
        prop_assert!((left - right).abs() <= 1e-8 * (1.0 + right.abs()));
        // The boundary itself belongs to the polynomial branch.
        prop_assert_eq!(sol.estimate(l), left);
    }
}
