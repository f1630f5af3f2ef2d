//! Seeded Monte Carlo oracle: channel sampling, eigenvalue batches,
//! empirical CDFs, Kolmogorov-Smirnov distances, and zero-forcing SNRs.
//!
//! Sampling is deterministic in (seed, n) alone: a run is partitioned into
//! fixed blocks of `BLOCK_SIZE` channels, block b drawn from a counter-based
//! generator keyed by (seed, stream index b), and blocks concatenated in
//! index order. `streams` only switches sequential against parallel block
//! evaluation, so the output is byte-identical for every streams value and
//! worker count.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::gram::{ChannelMatrix, EigenPair, GramMatrix2};
use crate::profile::VarianceProfile;
use crate::Result;

/// Samples per RNG substream. Fixed so the sample vector never depends on
/// the parallelism level.
pub const BLOCK_SIZE: usize = 4096;

/// |det W| at or below which a channel is treated as singular.
pub const SINGULAR_DET_TOL: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    /// Number of channel realizations.
    pub n: usize,
    pub seed: u64,
    /// Upper bound on concurrently evaluated blocks; 1 means sequential.
    pub streams: usize,
}

impl SampleConfig {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        Self::with_streams(n, seed, 1)
    }

    pub fn with_streams(n: usize, seed: u64, streams: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DomainError {
                what: "sample count must be at least 1".into(),
            });
        }
        if streams == 0 {
            return Err(Error::DomainError {
                what: "streams must be at least 1".into(),
            });
        }
        Ok(Self { n, seed, streams })
    }
}

/// Independent deterministic seed for a named purpose (splitmix64 mix of
/// seed and salt). Used to decorrelate e.g. the transpose-check sample from
/// the primary sample without asking the caller for two seeds.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// One Box-Muller pair from two generator words. u1 lands in (0, 1] so the
/// logarithm is finite; u2 in [0, 1).
pub fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    const TWO53: f64 = 9007199254740992.0;
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 / TWO53;
    let u2 = (rng.next_u64() >> 11) as f64 / TWO53;
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// One channel draw: h_ij = sqrt(phi_ij / 2) (g1 + i g2) with g1, g2
/// standard normal, entries in row-major order.
pub fn sample_channel(p: &VarianceProfile, rng: &mut ChaCha8Rng) -> ChannelMatrix {
    let mut h = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in h.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let (g1, g2) = standard_normal_pair(rng);
            let scale = (0.5 * p.phi(i, j)).sqrt();
            *entry = Complex64::new(scale * g1, scale * g2);
        }
    }
    ChannelMatrix::new(h).expect("normal draws are finite")
}

/// Map `f` over `c.n` sampled channels, preserving sample order.
pub fn sample_map<T, F>(p: &VarianceProfile, c: &SampleConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&ChannelMatrix) -> T + Sync,
{
    let nblocks = c.n.div_ceil(BLOCK_SIZE);
    let run_block = |b: usize| -> Vec<T> {
        let mut rng = block_rng(c.seed, b as u64);
        let count = BLOCK_SIZE.min(c.n - b * BLOCK_SIZE);
        (0..count).map(|_| f(&sample_channel(p, &mut rng))).collect()
    };
    let blocks: Vec<Vec<T>> = if c.streams == 1 {
        (0..nblocks).map(run_block).collect()
    } else {
        (0..nblocks).into_par_iter().map(run_block).collect()
    };
    blocks.into_iter().flatten().collect()
}

/// Ordered eigenvalue pairs of W = H H† for `c.n` sampled channels.
pub fn sample_eigs(p: &VarianceProfile, c: &SampleConfig) -> Vec<EigenPair> {
    sample_map(p, c, |h| {
        GramMatrix2::from_channel(h)
            .eigenvalues()
            .expect("sampled Gram matrices are PSD within tolerance")
    })
}

/// Zero-forcing per-user SNRs (SNR_1, SNR_2) at transmit SNR `rho`:
/// SNR_i = rho / [W^-1]_ii with W = H H†, i.e. rho det(W)/w2 and
/// rho det(W)/w1.
pub fn zf_snr(h: &ChannelMatrix, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::DomainError {
            what: format!("rho must be positive and finite, got {rho}"),
        });
    }
    let w = GramMatrix2::from_channel(h);
    let det = w.det();
    if det <= SINGULAR_DET_TOL {
        return Err(Error::SingularChannel { det });
    }
    Ok((rho * det / w.w2(), rho * det / w.w1()))
}

/// min_i SNR_i at rho = 1 for `c.n` sampled channels; a singular channel
/// contributes 0 (it is in outage at every positive rate). Multiply by rho
/// to get SNR_min at any transmit SNR.
pub fn sample_min_zf_snr(p: &VarianceProfile, c: &SampleConfig) -> Vec<f64> {
    sample_map(p, c, |h| match zf_snr(h, 1.0) {
        Ok((s1, s2)) => s1.min(s2),
        Err(_) => 0.0,
    })
}

/// Sorted sample with step-function CDF evaluation.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainError {
                what: "empirical CDF requires finite samples".into(),
            });
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    /// Fraction of samples <= x.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= x);
        k as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// One-sample Kolmogorov-Smirnov statistic sup_x |F_n(x) - F(x)|, taking
/// both one-sided gaps at every jump.
pub fn ks_statistic<F: Fn(f64) -> f64>(e: &EmpiricalCdf, cdf: F) -> f64 {
    let n = e.n() as f64;
    e.sorted()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let fx = cdf(x);
            let above = ((i + 1) as f64 / n - fx).abs();
            let below = (i as f64 / n - fx).abs();
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic by a sorted merge walk.
pub fn ks_statistic_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let xs = a.sorted();
    let ys = b.sorted();
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / xs.len() as f64;
        let fb = j as f64 / ys.len() as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Acceptance threshold for a one-sample KS test at the crate's fixed
/// confidence level (~1e-3 two-sided).
pub fn ks_threshold_one_sample(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

/// Threshold for a two-sample KS test with equal sizes n.
pub fn ks_threshold_two_sample(n: usize) -> f64 {
    1.95 * (2.0 / n as f64).sqrt()
}
