//! Seeded samplers and moment descriptors for the additive noise
//! distributions used by the mechanisms.
//!
//! Reproducibility contract: a stream is ChaCha12 keyed by `seed` with the
//! generator's stream counter set to `stream_id`; the same pair reproduces
//! the identical draw sequence bit-exactly, and distinct stream ids give
//! independent streams. Laplace draws use the inverse CDF of a single
//! uniform; Student t₃ draws delegate to `rand_distr::StudentT` (pinned by
//! the lockfile, so seed-stability holds per build).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StudentT};

use crate::error::{Error, Result};

/// Additive noise description: a sampleable distribution or a bare moment
/// vector for distributions only known through their moments.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// Zero-centered Laplace with scale b > 0.
    Laplace { b: f64 },
    /// Standard Student t with 3 degrees of freedom times `scale`.
    StudentT3 { scale: f64 },
    /// Moment vector μ_0..μ_p of a normalized distribution; not sampleable.
    MomentsOnly { mu: Vec<f64> },
}

impl NoiseModel {
    pub fn laplace(b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::Invalid(format!("laplace scale must be > 0, got {b}")));
        }
        Ok(NoiseModel::Laplace { b })
    }

    pub fn student_t3(scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Invalid(format!("t3 scale must be > 0, got {scale}")));
        }
        Ok(NoiseModel::StudentT3 { scale })
    }

    pub fn moments_only(mu: Vec<f64>) -> Result<Self> {
        match mu.first() {
            Some(&m0) if (m0 - 1.0).abs() <= 1e-12 => Ok(NoiseModel::MomentsOnly { mu }),
            _ => Err(Error::Invalid(
                "moment vector must start with μ_0 = 1 (normalized distribution)".to_string(),
            )),
        }
    }
}

/// Seeded, stream-addressed random source.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }

    /// Zero-centered Laplace(b) via the inverse CDF: for u ∈ (0, 1),
    /// b·ln(2u) below the median and −b·ln(2(1−u)) above it.
    pub fn laplace(&mut self, b: f64) -> f64 {
        loop {
            let u: f64 = self.rng.gen();
            if u == 0.0 {
                continue;
            }
            return if u < 0.5 {
                b * (2.0 * u).ln()
            } else {
                -b * (2.0 * (1.0 - u)).ln()
            };
        }
    }

    /// Standard Student t₃ draw.
    pub fn student_t3(&mut self) -> f64 {
        StudentT::new(3.0)
            .expect("3 degrees of freedom is valid")
            .sample(&mut self.rng)
    }
}

/// One zero-centered draw from a sampleable noise model.
pub fn sample(model: &NoiseModel, rng: &mut RngStream) -> Result<f64> {
    match model {
        NoiseModel::Laplace { b } => Ok(rng.laplace(*b)),
        NoiseModel::StudentT3 { scale } => Ok(scale * rng.student_t3()),
        NoiseModel::MomentsOnly { .. } => Err(Error::NoSampler),
    }
}

/// Raw moments μ_0..μ_p of Laplace(b): r!·b^r for even r, 0 for odd r.
pub fn laplace_moments(b: f64, p: usize) -> Vec<f64> {
    let mut mu = vec![0.0; p + 1];
    mu[0] = 1.0;
    for r in (2..=p).step_by(2) {
        mu[r] = mu[r - 2] * (r * (r - 1)) as f64 * b * b;
    }
    mu
}
