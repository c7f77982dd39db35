//! Reproducible Monte Carlo plumbing.
//!
//! Every stochastic routine in the crate draws its randomness through
//! [`trial_rng`], which derives an independent generator from
//! `(seed, stream, trial_index)`. Trials are accumulated in fixed-size
//! chunks and the chunk results are combined in index order, so estimates
//! are bit-identical whether the chunks run on one thread or many.

use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Trials per accumulation chunk. Fixed so that the floating-point
/// reduction order does not depend on the thread count.
const CHUNK: u64 = 8192;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Half-width of the `3·stderr` guard band used by verdicts.
    pub fn guard(&self) -> f64 {
        3.0 * self.stderr
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the generator for one trial of one logical stream.
///
/// The 256-bit ChaCha key is filled from a splitmix64 chain over
/// `(seed, stream, index)`, so distinct triples give independent streams
/// and the mapping is stable across platforms.
pub fn trial_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream.rotate_left(17))
        .wrapping_add(index.wrapping_mul(0xd1b5_4a32_d192_ed03));
    let mut key = [0u8; 32];
    for word in key.chunks_exact_mut(8) {
        word.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    rand::SeedableRng::from_seed(key)
}

fn chunk_bounds(trials: u64, chunk: u64) -> (u64, u64) {
    (chunk * CHUNK, ((chunk + 1) * CHUNK).min(trials))
}

fn chunk_sums<F>(seed: u64, stream: u64, trials: u64, chunk: u64, f: &F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let (lo, hi) = chunk_bounds(trials, chunk);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for index in lo..hi {
        let mut rng = trial_rng(seed, stream, index);
        let x = f(&mut rng);
        sum += x;
        sumsq += x * x;
    }
    (sum, sumsq)
}

fn finish(seed: u64, trials: u64, parts: Vec<(f64, f64)>) -> McEstimate {
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for (s, s2) in parts {
        sum += s;
        sumsq += s2;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 {
        ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        trials,
        seed,
    }
}

/// Sequential trial runner; always available and used by the benches as
/// the baseline.
pub fn sample_mean_seq<F>(seed: u64, stream: u64, trials: u64, f: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    assert!(trials > 0, "at least one trial required");
    let chunks = trials.div_ceil(CHUNK);
    let parts = (0..chunks)
        .map(|c| chunk_sums(seed, stream, trials, c, &f))
        .collect();
    finish(seed, trials, parts)
}

/// Parallel trial runner. Produces bit-identical output to
/// [`sample_mean_seq`] because chunk results are combined in index order.
#[cfg(feature = "parallel")]
pub fn sample_mean_par<F>(seed: u64, stream: u64, trials: u64, f: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    assert!(trials > 0, "at least one trial required");
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| chunk_sums(seed, stream, trials, c, &f))
        .collect();
    finish(seed, trials, parts)
}

/// Default trial runner: parallel when the `parallel` feature is enabled,
/// sequential otherwise.
pub fn sample_mean<F>(seed: u64, stream: u64, trials: u64, f: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        sample_mean_par(seed, stream, trials, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sample_mean_seq(seed, stream, trials, f)
    }
}

fn pair_chunk_sums<F>(seed: u64, stream: u64, trials: u64, chunk: u64, f: &F) -> [f64; 4]
where
    F: Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync,
{
    let (lo, hi) = chunk_bounds(trials, chunk);
    let mut acc = [0.0; 4];
    for index in lo..hi {
        let mut rng = trial_rng(seed, stream, index);
        let (x, y) = f(&mut rng);
        acc[0] += x;
        acc[1] += x * x;
        acc[2] += y;
        acc[3] += y * y;
    }
    acc
}

/// Runs two estimators on the same trials (same per-trial generator),
/// which keeps deterministic couplings between them intact.
pub fn sample_mean_pair<F>(seed: u64, stream: u64, trials: u64, f: F) -> (McEstimate, McEstimate)
where
    F: Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync,
{
    assert!(trials > 0, "at least one trial required");
    let chunks = trials.div_ceil(CHUNK);
    #[cfg(feature = "parallel")]
    let parts: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| pair_chunk_sums(seed, stream, trials, c, &f))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<[f64; 4]> = (0..chunks)
        .map(|c| pair_chunk_sums(seed, stream, trials, c, &f))
        .collect();
    let first = finish(
        seed,
        trials,
        parts.iter().map(|p| (p[0], p[1])).collect(),
    );
    let second = finish(
        seed,
        trials,
        parts.iter().map(|p| (p[2], p[3])).collect(),
    );
    (first, second)
}
