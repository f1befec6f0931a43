//! Deterministic parallel Monte Carlo helpers.
//!
//! Draws are split into fixed-size chunks; chunk i uses the stream id
//! `base_stream + i` under the caller's seed, so results are bit-identical
//! regardless of thread count or scheduling.

use rayon::prelude::*;

use crate::noise::RngStream;

const CHUNK: usize = 1 << 16;

/// Sample mean / variance / standard error of a seeded scalar simulation.
#[derive(Debug, Clone, Copy)]
pub struct McSummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn new() -> Self {
        Welford { n: 0.0, mean: 0.0, m2: 0.0 }
    }

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }
}

/// Run `f` on `n` independent draws of a per-chunk stream and summarize.
///
/// `f` receives a fresh `RngStream` position for every evaluation budgeted
/// out of its chunk; it may draw as many variates as it needs.
pub fn mc_stats<F>(n: usize, seed: u64, base_stream: u64, f: F) -> McSummary
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<Welford> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, base_stream + c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut w = Welford::new();
            for _ in 0..len {
                w.push(f(&mut rng));
            }
            w
        })
        .collect();
    let w = partials.into_iter().fold(Welford::new(), Welford::merge);
    let variance = if w.n > 1.0 { w.m2 / (w.n - 1.0) } else { 0.0 };
    McSummary {
        n,
        mean: w.mean,
        variance,
        se: (variance / w.n.max(1.0)).sqrt(),
    }
}

/// Collect all `n` values (for quantile / trimming work). Deterministic in
/// the same way as `mc_stats`.
pub fn mc_collect<F>(n: usize, seed: u64, base_stream: u64, f: F) -> Vec<f64>
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let mut chunks: Vec<(usize, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, base_stream + c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (c, (0..len).map(|_| f(&mut rng)).collect())
        })
        .collect();
    chunks.sort_by_key(|(c, _)| *c);
    chunks.into_iter().flat_map(|(_, v)| v).collect()
}

/// Variance after symmetrically trimming `trim` fraction from each tail.
/// Slightly biased low for heavy-tailed data; used where raw fourth moments
/// are unstable.
pub fn trimmed_variance(samples: &[f64], trim: f64) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let cut = ((xs.len() as f64) * trim).floor() as usize;
    let kept = &xs[cut..xs.len() - cut];
    let n = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / n;
    kept.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}
