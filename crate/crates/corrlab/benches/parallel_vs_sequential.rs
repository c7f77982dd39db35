//! Compares the rayon trial runner against the sequential fallback on
//! the two heaviest Monte Carlo kernels. Both paths share the
//! counter-based per-trial seeding and the fixed 8192-trial chunk
//! schedule, so the outputs are bit-identical and only throughput
//! differs; trial counts below span several chunks so the parallel
//! runner has work to distribute.

use criterion::{criterion_group, criterion_main, Criterion, SamplingMode};
use rand::Rng;
use std::hint::black_box;

fn majority_predictability_trial(rng: &mut rand_chacha::ChaCha8Rng, n: u64, rate: f64) -> f64 {
    use rand_distr::{Binomial, Distribution};
    let sampled = Binomial::new(n, rate).unwrap().sample(rng);
    let plus_sampled = if sampled > 0 {
        Binomial::new(sampled, 0.5).unwrap().sample(rng)
    } else {
        0
    };
    let s = 2 * plus_sampled as i64 - sampled as i64;
    let rest = n - sampled;
    let plus_rest = if rest > 0 {
        Binomial::new(rest, 0.5).unwrap().sample(rng)
    } else {
        0
    };
    let total = s + 2 * plus_rest as i64 - rest as i64;
    let outcome = if total > 0 { 1.0 } else { -1.0 };
    let predicted = match s.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    };
    outcome * predicted
}

fn bench_predictability(c: &mut Criterion) {
    let trials = 65_536u64;
    let kernel = |rng: &mut rand_chacha::ChaCha8Rng| majority_predictability_trial(rng, 10_001, 0.5);
    let mut group = c.benchmark_group("predictability_maj_n10001");
    group.sample_size(10);
    group.sampling_mode(SamplingMode::Flat);
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(corrlab::mc::sample_mean_seq(7, 201, trials, kernel)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(corrlab::mc::sample_mean_par(7, 201, trials, kernel)))
    });
    group.finish();
}

fn condorcet_trial(rng: &mut rand_chacha::ChaCha8Rng, k: usize, n: usize) -> f64 {
    let pairs = k * (k - 1) / 2;
    let mut sums = vec![0i64; pairs];
    let mut order: Vec<usize> = (0..k).collect();
    let mut rank = vec![0usize; k];
    for _ in 0..n {
        for i in (1..k).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for (p, &c) in order.iter().enumerate() {
            rank[c] = p;
        }
        let mut idx = 0;
        for a in 0..k {
            for b in a + 1..k {
                sums[idx] += if rank[a] > rank[b] { 1 } else { -1 };
                idx += 1;
            }
        }
    }
    // unique max indicator
    let beats = |a: usize, b: usize| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let idx = lo * k - lo * (lo + 1) / 2 + (hi - lo - 1);
        if a < b {
            sums[idx] > 0
        } else {
            sums[idx] < 0
        }
    };
    let uniq = (0..k).any(|a| (0..k).all(|b| a == b || beats(a, b)));
    f64::from(uniq)
}

fn bench_condorcet(c: &mut Criterion) {
    let trials = 32_768u64;
    let kernel = |rng: &mut rand_chacha::ChaCha8Rng| condorcet_trial(rng, 7, 501);
    let mut group = c.benchmark_group("condorcet_k7_n501");
    group.sample_size(10);
    group.sampling_mode(SamplingMode::Flat);
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(corrlab::mc::sample_mean_seq(7, 210, trials, kernel)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(corrlab::mc::sample_mean_par(7, 210, trials, kernel)))
    });
    group.finish();
}

criterion_group!(benches, bench_predictability, bench_condorcet);
criterion_main!(benches);
