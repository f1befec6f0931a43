//! Private release of a dataset's size and mean, two ways, plus the
//! standard-deviation comparison sweep between them.
//!
//! The unbiased mechanism (tag `M_U`) releases ñ = n + Lap(1/ε₁) and
//! s̃ = s + Lap(1/ε₂), then multiplies s̃ by the extension-based unbiased
//! estimate of 1/n evaluated at ñ; independence of the two noise draws
//! makes the product unbiased for the mean s/n whenever n is at least the
//! extension boundary. The smooth-sensitivity mechanism (tag `M_SS`) adds
//! scaled Student-t₃ noise directly to the clamped mean, giving a biased
//! but lighter-tailed-at-small-n release with fat (t₃) tails.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension_optimizer::{solve, ExtensionProblem, ExtensionSolution, PriorMeasure};
use crate::function_model::SmoothFunction;
use crate::noise::RngStream;
use rayon::prelude::*;

/// Record count and bounded-attribute sum (each record's value in [0,1]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dataset {
    n: u64,
    s: f64,
}

impl Dataset {
    pub fn new(n: u64, s: f64) -> Result<Self> {
        if !(0.0..=n as f64).contains(&s) {
            return Err(Error::Invalid(format!(
                "attribute sum must lie in [0, n] = [0, {n}], got {s}"
            )));
        }
        Ok(Dataset { n, s })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Parameters of the unbiased mechanism: privacy budgets for the two
/// releases and the solved inverse-extension used to turn ñ into an
/// unbiased estimate of 1/n.
#[derive(Debug, Clone)]
pub struct MuParams {
    eps1: f64,
    eps2: f64,
    extension: ExtensionSolution,
}

impl MuParams {
    /// Wraps an already-solved extension; it must estimate `inverse` under
    /// noise scale 1/ε₁.
    pub fn new(eps1: f64, eps2: f64, extension: ExtensionSolution) -> Result<Self> {
        if !(eps1 > 0.0 && eps2 > 0.0) {
            return Err(Error::Invalid(format!(
                "privacy budgets must be > 0, got ε₁ = {eps1}, ε₂ = {eps2}"
            )));
        }
        let p = extension.problem();
        if !p.f().is_inverse() {
            return Err(Error::Invalid(format!(
                "extension must target the inverse function, got {}",
                p.f().name()
            )));
        }
        let want_b = 1.0 / eps1;
        if (p.b() - want_b).abs() > 1e-12 * want_b {
            return Err(Error::Invalid(format!(
                "extension noise scale {} does not match 1/ε₁ = {want_b}",
                p.b()
            )));
        }
        Ok(MuParams { eps1, eps2, extension })
    }

    /// Solves the extension for the given degree, boundary, and prior, then
    /// wraps it.
    pub fn build(
        eps1: f64,
        eps2: f64,
        k: usize,
        lower: f64,
        prior: PriorMeasure,
    ) -> Result<Self> {
        let problem =
            ExtensionProblem::new(SmoothFunction::inverse(), lower, k, 1.0 / eps1, prior)?;
        MuParams::new(eps1, eps2, solve(&problem)?)
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    pub fn k(&self) -> usize {
        self.extension.problem().k()
    }

    pub fn lower(&self) -> f64 {
        self.extension.problem().lower()
    }

    pub fn extension(&self) -> &ExtensionSolution {
        &self.extension
    }
}

/// Parameters of the smooth-sensitivity mechanism; the privacy identity
/// ε₂ = 4β + 2/(√3·τ) must hold.
#[derive(Debug, Clone, Copy)]
pub struct MssParams {
    eps1: f64,
    eps2: f64,
    beta: f64,
    tau: f64,
}

impl MssParams {
    pub fn new(eps1: f64, eps2: f64, beta: f64, tau: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps2 > 0.0 && beta > 0.0 && tau > 0.0) {
            return Err(Error::Invalid(
                "all smooth-sensitivity parameters must be > 0".to_string(),
            ));
        }
        let implied = 4.0 * beta + 2.0 / (3.0f64.sqrt() * tau);
        if (implied - eps2).abs() > 1e-12 * eps2 {
            return Err(Error::Invalid(format!(
                "β and τ spend {implied}, not the stated budget ε₂ = {eps2}"
            )));
        }
        Ok(MssParams { eps1, eps2, beta, tau })
    }

    /// The β = ε₂/12, τ = √3/ε₂ split (one third of the budget on the
    /// exponential decay, two thirds on the noise scale).
    pub fn default_split(eps1: f64, eps2: f64) -> Result<Self> {
        MssParams::new(eps1, eps2, eps2 / 12.0, 3.0f64.sqrt() / eps2)
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn noise_scale(&self, n: u64) -> f64 {
        self.tau * (-self.beta * (n as f64 - 1.0)).exp().max(1.0 / n.max(1) as f64)
    }

    fn center(d: Dataset) -> f64 {
        if d.n >= 1 {
            d.s / d.n as f64
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MechanismTag {
    #[serde(rename = "M_U")]
    Unbiased,
    #[serde(rename = "M_SS")]
    SmoothSensitivity,
}

impl std::fmt::Display for MechanismTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MechanismTag::Unbiased => "M_U",
            MechanismTag::SmoothSensitivity => "M_SS",
        })
    }
}

/// One released (size, mean) pair with full reproducibility provenance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanRelease {
    pub n_tilde: f64,
    pub m_tilde: f64,
    pub mechanism: MechanismTag,
    pub seed: u64,
    pub stream_id: u64,
}

/// Unbiased mechanism: draws the size noise, then the sum noise, in that
/// order from `rng`.
pub fn run_mu(d: Dataset, p: &MuParams, rng: &mut RngStream) -> MeanRelease {
    let n_tilde = d.n as f64 + rng.laplace(1.0 / p.eps1);
    let s_tilde = d.s + rng.laplace(1.0 / p.eps2);
    let v_tilde = p.extension.estimate(n_tilde);
    MeanRelease {
        n_tilde,
        m_tilde: s_tilde * v_tilde,
        mechanism: MechanismTag::Unbiased,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    }
}

/// V[m̃] for the unbiased mechanism: with s̃ independent of ñ,
/// (s² + V[s̃])·(1/n² + V[g(ñ)]) − s²/n², where V[s̃] = 2/ε₂².
pub fn mu_variance(d: Dataset, p: &MuParams) -> Result<f64> {
    let n = d.n as f64;
    if n < p.lower() {
        return Err(Error::Invalid(format!(
            "variance formula needs n ≥ {}, got {n}",
            p.lower()
        )));
    }
    let var_g = p.extension.estimator_variance(n)?;
    let var_s = 2.0 / (p.eps2 * p.eps2);
    let s = d.s;
    Ok(((s * s + var_s) * (1.0 / (n * n) + var_g) - s * s / (n * n)).max(0.0))
}

/// Smooth-sensitivity mechanism: size noise first, then one t₃ draw.
pub fn run_mss(d: Dataset, p: &MssParams, rng: &mut RngStream) -> MeanRelease {
    let n_tilde = d.n as f64 + rng.laplace(1.0 / p.eps1);
    let m_tilde = MssParams::center(d) + rng.student_t3() * p.noise_scale(d.n);
    MeanRelease {
        n_tilde,
        m_tilde,
        mechanism: MechanismTag::SmoothSensitivity,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    }
}

/// V[m̃] for the smooth-sensitivity mechanism:
/// 3τ²·max(e^{−β(n−1)}, 1/max(n,1))².
pub fn mss_variance(d: Dataset, p: &MssParams) -> f64 {
    let scale = p.noise_scale(d.n);
    3.0 * scale * scale
}

/// One row of the standard-deviation comparison sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub sd_mu: f64,
    pub sd_mss: f64,
    pub ratio: f64,
}

/// Analytic SD of both mechanisms over an n-grid with the mean held fixed
/// at `m_fixed` (so s = m·n at every grid point).
pub fn sd_sweep(
    n_grid: &[u64],
    m_fixed: f64,
    mu: &MuParams,
    mss: &MssParams,
) -> Result<Vec<SweepRow>> {
    if !(0.0..=1.0).contains(&m_fixed) {
        return Err(Error::Invalid(format!(
            "fixed mean must lie in [0,1], got {m_fixed}"
        )));
    }
    n_grid
        .par_iter()
        .map(|&n| {
            let d = Dataset::new(n, m_fixed * n as f64)?;
            let sd_mu = mu_variance(d, mu)?.sqrt();
            let sd_mss = mss_variance(d, mss).sqrt();
            Ok(SweepRow { n, sd_mu, sd_mss, ratio: sd_mss / sd_mu })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{mc_collect, mc_stats, trimmed_variance};

    fn test_mu_params() -> MuParams {
        MuParams::build(0.5, 0.5, 10, 1.0, PriorMeasure::uniform(1.0, 300.0).unwrap()).unwrap()
    }

    #[test]
    fn dataset_bounds() {
        assert!(Dataset::new(10, 5.0).is_ok());
        assert!(Dataset::new(10, 10.0).is_ok());
        assert!(Dataset::new(10, -0.1).is_err());
        assert!(Dataset::new(10, 10.5).is_err());
        assert!(Dataset::new(0, 0.0).is_ok());
    }

    #[test]
    fn params_validation() {
        let mu = test_mu_params();
        assert_eq!(mu.k(), 10);
        assert_eq!(mu.lower(), 1.0);
        assert!(MuParams::new(1.0, 0.5, mu.extension().clone()).is_err(), "b ≠ 1/ε₁");

        assert!(MssParams::default_split(0.5, 0.5).is_ok());
        assert!(MssParams::new(0.5, 0.5, 0.1, 1.0).is_err(), "budget identity violated");
        let p = MssParams::default_split(0.5, 0.5).unwrap();
        assert!((p.tau() - 2.0 * 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mu_is_unbiased_mc() {
        let p = test_mu_params();
        for (i, (n, s)) in [(100u64, 50.0), (1, 0.5)].into_iter().enumerate() {
            let d = Dataset::new(n, s).unwrap();
            let p = p.clone();
            let st = mc_stats(1_000_000, 9_100 + i as u64, 0, move |rng| {
                run_mu(d, &p, rng).m_tilde
            });
            let want = s / n as f64;
            assert!(
                (st.mean - want).abs() <= 4.0 * st.se,
                "n={n}: mean {} vs {want} (se {})",
                st.mean,
                st.se
            );
        }
    }

    #[test]
    fn mu_fourth_moment_is_empirically_stable() {
        // n = 50 keeps ñ far above the polynomial boundary, so the release's
        // tails are plain Laplace and the empirical 4th moment settles.
        let p = test_mu_params();
        let d = Dataset::new(50, 25.0).unwrap();
        let dev4 = move |p: &MuParams, rng: &mut RngStream| {
            let dev = run_mu(d, p, rng).m_tilde - 0.5;
            dev * dev * dev * dev
        };
        let pa = p.clone();
        let half = mc_stats(5_000_000, 9_150, 0, move |rng| dev4(&pa, rng));
        let full = mc_stats(10_000_000, 9_150, 0, move |rng| dev4(&p, rng));
        let ratio = full.mean / half.mean;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "4th moment unstable under doubling: {} vs {} (ratio {ratio})",
            half.mean,
            full.mean
        );
    }

    #[test]
    fn size_noise_has_documented_scale() {
        let p = test_mu_params();
        let d = Dataset::new(100, 50.0).unwrap();
        let pc = p.clone();
        let st = mc_stats(1_000_000, 9_200, 0, move |rng| {
            let r = run_mu(d, &pc, rng);
            let delta = r.n_tilde - 100.0;
            delta * delta
        });
        // Var(Lap(2)) = 8; SE of that estimate uses E[Z⁴] = 24b⁴.
        let se = (320.0f64 / 1e6).sqrt();
        assert!(
            (st.mean - 8.0).abs() <= 3.0 * se,
            "ñ variance {} (se {se})",
            st.mean
        );
    }

    #[test]
    fn mu_variance_formula() {
        let p = test_mu_params();
        let zero_s = mu_variance(Dataset::new(50, 0.0).unwrap(), &p).unwrap();
        let var_g = p.extension().estimator_variance(50.0).unwrap();
        let direct = (2.0 / (0.5 * 0.5)) * (1.0 / 2500.0 + var_g);
        assert!((zero_s - direct).abs() <= 1e-12 * direct);
        assert!(zero_s >= 0.0);
        assert!(mu_variance(Dataset::new(0, 0.0).unwrap(), &p).is_err());

        let d = Dataset::new(200, 100.0).unwrap();
        let analytic = mu_variance(d, &p).unwrap();
        let pc = p.clone();
        let st = mc_stats(1_000_000, 9_300, 0, move |rng| run_mu(d, &pc, rng).m_tilde);
        let mean = st.mean;
        let pc = p.clone();
        let st2 = mc_stats(1_000_000, 9_300, 0, move |rng| {
            let delta = run_mu(d, &pc, rng).m_tilde - mean;
            delta * delta
        });
        assert!(
            ((analytic - st2.mean) / analytic).abs() < 0.05,
            "analytic {analytic} vs MC {}",
            st2.mean
        );
    }

    #[test]
    fn mss_center_and_scale() {
        // Near-zero noise scale isolates the center logic.
        let tiny =
            MssParams::new(1.0, 4e-9 + 2.0 / (3.0f64.sqrt() * 1e-9), 1e-9, 1e-9).unwrap();
        let mut rng = RngStream::new(1, 0);
        let r = run_mss(Dataset::new(0, 0.0).unwrap(), &tiny, &mut rng);
        assert!((r.m_tilde - 1.0).abs() < 1e-5, "empty-data center is 1");
        let r = run_mss(Dataset::new(4, 3.0).unwrap(), &tiny, &mut rng);
        assert!((r.m_tilde - 0.75).abs() < 1e-5);

        let p = MssParams::default_split(0.5, 0.5).unwrap();
        assert!((mss_variance(Dataset::new(1, 0.5).unwrap(), &p) - 36.0).abs() < 1e-12);
        // At n = 1 both max-branches equal 1, so the multiplier is exactly τ.
        assert!((p.noise_scale(1) - p.tau()).abs() < 1e-15);
    }

    #[test]
    fn mss_is_unbiased_for_nonempty_data_mc() {
        let p = MssParams::default_split(0.5, 0.5).unwrap();
        let d = Dataset::new(100, 50.0).unwrap();
        let st = mc_stats(1_000_000, 9_400, 0, move |rng| run_mss(d, &p, rng).m_tilde);
        assert!(
            (st.mean - 0.5).abs() <= 4.0 * st.se,
            "mean {} (se {})",
            st.mean,
            st.se
        );
    }

    #[test]
    fn mss_variance_matches_trimmed_mc() {
        let p = MssParams::default_split(0.5, 0.5).unwrap();
        for (i, n) in [1u64, 10, 100].into_iter().enumerate() {
            let d = Dataset::new(n, 0.5 * n as f64).unwrap();
            let xs = mc_collect(1_000_000, 9_500 + i as u64, 0, move |rng| {
                run_mss(d, &p, rng).m_tilde
            });
            // t₃ has no finite fourth moment, so the raw sample variance is
            // unusable; trim a sliver from each tail (costs a few % of the
            // variance, well inside the 10% window).
            let trimmed = trimmed_variance(&xs, 1e-5);
            let analytic = mss_variance(d, &p);
            assert!(
                ((trimmed - analytic) / analytic).abs() < 0.10,
                "n={n}: trimmed {trimmed} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn sweep_is_complete_and_consistent() {
        let mu = test_mu_params();
        let mss = MssParams::default_split(0.5, 0.5).unwrap();
        let grid: Vec<u64> = (1..=300).collect();
        let rows = sd_sweep(&grid, 0.5, &mu, &mss).unwrap();
        assert_eq!(rows.len(), 300);
        for r in &rows {
            assert!(r.sd_mu.is_finite() && r.sd_mu > 0.0);
            assert!(r.sd_mss.is_finite() && r.sd_mss > 0.0);
            assert!((r.ratio - r.sd_mss / r.sd_mu).abs() < 1e-15);
        }
        // Large-n limit: both SDs shrink like 1/n and the ratio settles
        // near √(36/10).
        let r200 = &rows[199];
        assert!(
            r200.ratio > 1.7 && r200.ratio < 2.1,
            "ratio at n=200: {}",
            r200.ratio
        );
        assert!(sd_sweep(&grid, 1.5, &mu, &mss).is_err());
    }
}
