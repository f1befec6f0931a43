//! Debiasing polynomials under arbitrary noise, known only through moments.
//!
//! Laplace is nowhere required: if the additive noise has known moments
//! μ₁..μ_k, the map a ↦ E[poly_a(q + Z)] is triangular in the coefficient
//! basis and inverts by back-substitution. One release per coordinate also
//! gives products across independent coordinates for free.
//!
//!     cargo run --release --example general_moments

use unbias::function_model::Polynomial;
use unbias::general_noise::{debias_coeffs, multivariate_debias, MomentMatrix};
use unbias::mc::mc_stats;

fn main() -> unbias::Result<()> {
    // Uniform(−1, 1) noise: μ = 1, 0, 1/3, 0, 1/5.
    let mu = [1.0, 0.0, 1.0 / 3.0, 0.0, 0.2];
    let target = Polynomial::new(vec![0.0, 0.0, 0.0, 0.0, 1.0]); // x⁴
    let g = debias_coeffs(&target, &mu)?;
    println!("noise: Uniform(−1, 1); target f(x) = x⁴");
    println!("unbiased g coefficients: {:?}", g.coeffs());

    let m = MomentMatrix::new(&mu)?;
    println!("round trip E[g(q + Z)] coefficients: {:?}", m.expectation_coeffs(g.coeffs()));
    println!("condition estimate of the moment system: {:.2}\n", m.condition_estimate());

    let q = 1.3;
    let mc = mc_stats(4_000_000, 5, 0, |rng| g.eval(q + 2.0 * rng.uniform() - 1.0));
    let z = (mc.mean - q.powi(4)) / mc.se;
    println!("MC at q = {q}: mean {:.6} vs q⁴ = {:.6} (z = {z:+.2})\n", mc.mean, q.powi(4));

    // Product of two independently noised coordinates: E[q₁²·q₂].
    let laplace_mu = unbias::noise::laplace_moments(0.7, 4);
    let targets = vec![
        (Polynomial::new(vec![0.0, 0.0, 1.0]), laplace_mu.clone()),
        (Polynomial::new(vec![0.0, 1.0]), mu.to_vec()),
    ];
    let (q1, q2) = (3.0, 2.0);
    let joint = mc_stats(4_000_000, 6, 0, |rng| {
        let x1 = q1 + rng.laplace(0.7);
        let x2 = q2 + 2.0 * rng.uniform() - 1.0;
        multivariate_debias(&targets, &[x1, x2]).unwrap()
    });
    let truth = q1 * q1 * q2;
    println!("mixed-noise product target q₁²·q₂ = {truth}");
    println!(
        "joint estimator mean {:.4} ± {:.4} (z = {:+.2})",
        joint.mean,
        joint.se,
        (joint.mean - truth) / joint.se
    );
    Ok(())
}
