//! Social-choice machinery: vote/sample prediction and Condorcet
//! aggregation statistics.
//!
//! Majority queries never materialize tables; they work with the sampled
//! vote sum directly, so voter counts up to 10^5 stay cheap. All
//! simulations are seeded and reproducible independently of thread count.

use crate::error::{Error, Result};
use crate::gaussian::{ln_normal_cdf, sample_standard_normal};
use crate::mc::{sample_mean, sample_mean_pair, McEstimate};
use crate::spaces::{ravel, FiniteSpace, JointDistribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Largest `k` for which Condorcet trials sample ranking-type counts via
/// sequential binomials instead of per-voter shuffles.
const TYPE_SAMPLING_MAX_K: usize = 5;

/// The vote/sample correlated pair: component 0 is the intended vote on
/// `{-1,+1}`, component 1 the sampled status on `{-1,0,+1}` where `0`
/// means "not sampled". Each voter is sampled with probability
/// `sample_rate`; the maximal correlation of the pair is
/// `sqrt(sample_rate)`.
pub fn vote_sample_joint(sample_rate: f64) -> Result<JointDistribution> {
    if !(0.0..=1.0).contains(&sample_rate) || sample_rate.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "sample rate must lie in [0,1], got {sample_rate}"
        )));
    }
    let rho = sample_rate;
    // rows: vote -1, +1; cols: sample -1, 0, +1
    let tensor = vec![
        rho / 2.0,
        (1.0 - rho) / 2.0,
        0.0,
        0.0,
        (1.0 - rho) / 2.0,
        rho / 2.0,
    ];
    let vote = FiniteSpace::uniform_bit();
    let sample = FiniteSpace::new(
        vec!["-1", "0", "+1"],
        vec![rho / 2.0, 1.0 - rho, rho / 2.0],
    )?;
    JointDistribution::new(vec![vote, sample], tensor)
}

/// Joint law of the three pairwise statuses `(x¹˃², x¹˃³, x²˃³)` of a
/// uniformly random order on three candidates. Pairwise marginals are
/// uniform and independent; the triple is not 3-wise independent.
pub fn condorcet_status_joint() -> JointDistribution {
    let labels: Vec<Vec<String>> = (0..3)
        .map(|_| vec!["-1".to_string(), "+1".to_string()])
        .collect();
    let mut weights = vec![0.0; 8];
    for perm in permutations(3) {
        let bit = |a: usize, b: usize| usize::from(perm[a] > perm[b]);
        let idx = [bit(0, 1), bit(0, 2), bit(1, 2)];
        weights[ravel(&idx, &[2, 2, 2])] += 1.0;
    }
    JointDistribution::from_weights(labels, weights).expect("static fixture")
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1])
        else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

/// Each voter's ranking of `k` candidates; `rank[c]` is candidate `c`'s
/// position, higher meaning more preferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingProfile {
    k: usize,
    rankings: Vec<Vec<usize>>,
}

impl RankingProfile {
    pub fn new(k: usize, rankings: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        for (voter, r) in rankings.iter().enumerate() {
            if r.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "voter {voter} ranks {} candidates, expected {k}",
                    r.len()
                )));
            }
            let mut seen = vec![false; k];
            for &v in r {
                if v >= k || seen[v] {
                    return Err(Error::InvalidParameter(format!(
                        "voter {voter}'s ranking is not a permutation of 0..{k}"
                    )));
                }
                seen[v] = true;
            }
        }
        Ok(Self { k, rankings })
    }

    /// Independent uniformly random rankings via seeded Fisher-Yates.
    pub fn random_uniform(k: usize, n: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut rankings = Vec::with_capacity(n);
        for _ in 0..n {
            rankings.push(random_ranking(k, rng));
        }
        Self::new(k, rankings)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.rankings.len()
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    /// The `±1` comparison vector `x^{a>b}`: entry `i` is `+1` when voter
    /// `i` ranks `a` above `b`.
    pub fn pairwise_vector(&self, a: usize, b: usize) -> Result<Vec<i8>> {
        if a == b {
            return Err(Error::InvalidParameter(
                "pairwise_vector requires distinct candidates".into(),
            ));
        }
        if a >= self.k || b >= self.k {
            return Err(Error::IndexOutOfRange(format!(
                "candidates {a},{b} of {}",
                self.k
            )));
        }
        Ok(self
            .rankings
            .iter()
            .map(|r| if r[a] > r[b] { 1 } else { -1 })
            .collect())
    }

    /// Reverses every voter's order.
    pub fn reversed(&self) -> Self {
        let rankings = self
            .rankings
            .iter()
            .map(|r| r.iter().map(|&v| self.k - 1 - v).collect())
            .collect();
        Self {
            k: self.k,
            rankings,
        }
    }

    /// Candidate relabeling: new candidate `c` is old candidate `perm[c]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::DimensionMismatch(
                "relabeling permutation has wrong length".into(),
            ));
        }
        let rankings = self
            .rankings
            .iter()
            .map(|r| perm.iter().map(|&old| r[old]).collect())
            .collect();
        Self::new(self.k, rankings)
    }
}

fn random_ranking(k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..k).collect();
    for i in (1..k).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    // order[p] = candidate at position p; rank = position
    let mut rank = vec![0; k];
    for (p, &c) in order.iter().enumerate() {
        rank[c] = p;
    }
    rank
}

/// A complete orientation of the pairs of `[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tournament {
    k: usize,
    /// `beats[pair_index(a, b)]` is true when `a` beats `b`, for `a < b`.
    beats: Vec<bool>,
}

impl Tournament {
    fn pair_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.k);
        a * self.k - a * (a + 1) / 2 + (b - a - 1)
    }

    /// Builds a tournament from an orientation callback: `true` means the
    /// smaller-indexed candidate wins.
    pub fn from_fn(k: usize, mut wins: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "tournament needs k >= 2, got {k}"
            )));
        }
        let mut beats = Vec::with_capacity(k * (k - 1) / 2);
        for a in 0..k {
            for b in a + 1..k {
                beats.push(wins(a, b));
            }
        }
        Ok(Self { k, beats })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Does `a` beat `b`?
    pub fn beats(&self, a: usize, b: usize) -> bool {
        if a < b {
            self.beats[self.pair_index(a, b)]
        } else {
            !self.beats[self.pair_index(b, a)]
        }
    }

    /// True when some candidate beats every other.
    pub fn uniq_max(&self) -> bool {
        (0..self.k).any(|a| (0..self.k).all(|b| a == b || self.beats(a, b)))
    }

    /// Acyclicity by repeated sink removal: a tournament is acyclic iff
    /// one can repeatedly remove a candidate that beats no remaining one.
    pub fn acyclic(&self) -> bool {
        let mut alive = vec![true; self.k];
        let mut out_degree: Vec<usize> = (0..self.k)
            .map(|a| (0..self.k).filter(|&b| b != a && self.beats(a, b)).count())
            .collect();
        for _ in 0..self.k {
            let Some(sink) = (0..self.k).find(|&a| alive[a] && out_degree[a] == 0) else {
                return false;
            };
            alive[sink] = false;
            for a in 0..self.k {
                if alive[a] && self.beats(a, sink) {
                    out_degree[a] -= 1;
                }
            }
        }
        true
    }

    /// Reverses every edge.
    pub fn reverse(&self) -> Self {
        Self {
            k: self.k,
            beats: self.beats.iter().map(|b| !b).collect(),
        }
    }

    /// Relabeled tournament: new pair `(a, b)` is the old `(perm[a], perm[b])`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::DimensionMismatch(
                "relabeling permutation has wrong length".into(),
            ));
        }
        Self::from_fn(self.k, |a, b| self.beats(perm[a], perm[b]))
    }
}

/// Aggregates a profile into a tournament with a `±1`-valued pairwise
/// rule. Antisymmetry `f(-x) = -f(x)` is checked exactly on every
/// comparison vector the aggregation evaluates.
pub fn aggregate(
    profile: &RankingProfile,
    rule: impl Fn(&[i8]) -> i8,
) -> Result<Tournament> {
    let k = profile.k();
    if k < 2 {
        return Err(Error::InvalidParameter("need at least two candidates".into()));
    }
    let mut result = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            let x = profile.pairwise_vector(a, b)?;
            let v = rule(&x);
            let neg: Vec<i8> = x.iter().map(|&s| -s).collect();
            let w = rule(&neg);
            if v.abs() != 1 || w != -v {
                return Err(Error::InvalidFunction(format!(
                    "rule is not an antisymmetric ±1 function on pair ({a},{b})"
                )));
            }
            result.push(v == 1);
        }
    }
    let mut it = result.into_iter();
    Tournament::from_fn(k, |_, _| it.next().expect("one value per pair"))
}

/// Majority pairwise rule; ties broken toward the second candidate (an
/// odd voter count cannot tie).
pub fn majority_rule(x: &[i8]) -> i8 {
    let sum: i64 = x.iter().map(|&s| s as i64).sum();
    if sum > 0 {
        1
    } else {
        -1
    }
}

/// Vote aggregation families supported by the prediction estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictRule {
    Majority,
    Dictator,
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("validated parameters").sample(rng)
}

/// Estimates `E[f · sgn(Tf)]`, the alignment between the outcome of the
/// vote and its optimal prediction from a `sample_rate` sample of
/// voters. Majority uses the sampled-vote sum as the exact conditional
/// statistic; a zero sampled sum is resolved by an independent fair coin.
pub fn predictability(
    n: usize,
    sample_rate: f64,
    rule: PredictRule,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "predictability requires an odd voter count, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&sample_rate) || sample_rate.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "sample rate must lie in [0,1], got {sample_rate}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    let est = match rule {
        PredictRule::Majority => sample_mean(seed, 201, trials, move |rng| {
            let sampled = binomial(rng, n as u64, sample_rate);
            let plus_sampled = binomial(rng, sampled, 0.5);
            let sampled_sum = 2 * plus_sampled as i64 - sampled as i64;
            let rest = n as u64 - sampled;
            let plus_rest = binomial(rng, rest, 0.5);
            let total = sampled_sum + 2 * plus_rest as i64 - rest as i64;
            let outcome = if total > 0 { 1.0 } else { -1.0 };
            let predicted = match sampled_sum.cmp(&0) {
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
        }),
        PredictRule::Dictator => sample_mean(seed, 202, trials, move |rng| {
            let vote: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let queried = rng.random::<f64>() < sample_rate;
            let predicted = if queried {
                vote
            } else if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            };
            vote * predicted
        }),
    };
    Ok(est)
}

/// Uniq-max and acyclicity frequencies of majority Condorcet aggregation,
/// estimated on shared trials.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CondorcetEstimate {
    pub uniq_max: McEstimate,
    pub acyclic: McEstimate,
    pub k: usize,
    pub n: usize,
}

/// Per ranking type, the `±1` status of each pair `(a, b)` with `a < b`.
fn type_signs(k: usize) -> Vec<Vec<i8>> {
    permutations(k)
        .into_iter()
        .map(|rank| {
            let mut row = Vec::with_capacity(k * (k - 1) / 2);
            for a in 0..k {
                for b in a + 1..k {
                    row.push(if rank[a] > rank[b] { 1 } else { -1 });
                }
            }
            row
        })
        .collect()
}

fn tournament_from_sums(k: usize, sums: &[i64]) -> Tournament {
    let mut it = sums.iter();
    Tournament::from_fn(k, |_, _| {
        let s = *it.next().expect("one sum per pair");
        debug_assert!(s != 0, "odd voter counts cannot tie");
        s > 0
    })
    .expect("k validated by caller")
}

/// Simulates Condorcet voting with `f = majority` over `n` voters with
/// independent uniform rankings.
pub fn condorcet_simulate(
    k: usize,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<CondorcetEstimate> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "condorcet_simulate requires k >= 3, got {k}"
        )));
    }
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "condorcet_simulate requires an odd voter count, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    let pairs = k * (k - 1) / 2;
    let (uniq_max, acyclic) = if k <= TYPE_SAMPLING_MAX_K {
        // Sample ranking-type counts with sequential binomials, then add
        // each type's sign pattern in bulk.
        let types = type_signs(k);
        let cells = types.len() as u64;
        sample_mean_pair(seed, 210, trials, move |rng| {
            let mut sums = vec![0i64; pairs];
            let mut remaining = n as u64;
            for (t, row) in types.iter().enumerate() {
                if remaining == 0 {
                    break;
                }
                let left = cells - t as u64;
                let count = if left == 1 {
                    remaining
                } else {
                    binomial(rng, remaining, 1.0 / left as f64)
                };
                if count > 0 {
                    for (pair, &s) in row.iter().enumerate() {
                        sums[pair] += s as i64 * count as i64;
                    }
                    remaining -= count;
                }
            }
            let t = tournament_from_sums(k, &sums);
            (f64::from(t.uniq_max()), f64::from(t.acyclic()))
        })
    } else {
        sample_mean_pair(seed, 210, trials, move |rng| {
            let mut sums = vec![0i64; pairs];
            let mut order: Vec<usize> = (0..k).collect();
            for _ in 0..n {
                for i in (1..k).rev() {
                    let j = rng.random_range(0..=i);
                    order.swap(i, j);
                }
                let mut rank = vec![0usize; k];
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
            let t = tournament_from_sums(k, &sums);
            (f64::from(t.uniq_max()), f64::from(t.acyclic()))
        })
    };
    Ok(CondorcetEstimate {
        uniq_max,
        acyclic,
        k,
        n,
    })
}

/// Closed-form maximal correlation between the joint status of the pairs
/// `(1>2), …, (1>r)` and the status of `(1>r+1)` under a uniform random
/// order: `sqrt((r-1) / (3(r+1)))`, increasing to `1/sqrt(3)`.
pub fn condorcet_rho(r: usize) -> Result<f64> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "condorcet_rho requires r >= 2, got {r}"
        )));
    }
    let r = r as f64;
    Ok(((r - 1.0) / (3.0 * (r + 1.0))).sqrt())
}

/// Independent enumeration of the same quantity over all orders of
/// `r + 1` candidates: the conditional-expectation second moment of the
/// unique unit-variance function on the `(1>r+1)` side.
pub fn condorcet_rho_enumerated(r: usize) -> Result<f64> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "condorcet_rho_enumerated requires r >= 2, got {r}"
        )));
    }
    if r > 8 {
        return Err(Error::SizeCapExceeded(format!(
            "enumeration over S_{} is too large",
            r + 1
        )));
    }
    let k = r + 1;
    let perms = permutations(k);
    // bucket by the status vector of pairs (0>1), ..., (0>r-1)
    let mut count = vec![0u64; 1 << (r - 1)];
    let mut sum_f = vec![0i64; 1 << (r - 1)];
    for rank in &perms {
        let mut key = 0usize;
        for b in 1..r {
            key = key << 1 | usize::from(rank[0] > rank[b]);
        }
        count[key] += 1;
        sum_f[key] += if rank[0] > rank[r] { 1 } else { -1 };
    }
    let total = perms.len() as f64;
    let mut second_moment = 0.0;
    for (c, s) in count.iter().zip(&sum_f) {
        if *c > 0 {
            let mean = *s as f64 / *c as f64;
            second_moment += (*c as f64 / total) * mean * mean;
        }
    }
    Ok(second_moment.sqrt())
}

/// Monte Carlo estimate of the limiting probability that majority
/// aggregation orders all `k` candidates linearly, via the Gaussian
/// representation `N_{a>b} = (X_a − X_b + Z_{ab})/√3`.
///
/// Conditioned on the `X`'s the pair events are independent, so each
/// trial contributes `Π_{a<b} Φ(X_a − X_b)` exactly. The `X` proposal is
/// mean-shifted to the expected normal order statistics (Blom scores),
/// which keeps the importance weights non-degenerate through `k ≈ 12`;
/// the estimate is scaled by `k!` for the union over orders.
pub fn gaussian_linear_order_probability(k: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "gaussian_linear_order_probability requires k >= 3, got {k}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    let shifts: Vec<f64> = (0..k)
        .map(|a| {
            let rank_from_below = (k - a) as f64;
            crate::gaussian::normal_quantile((rank_from_below - 0.375) / (k as f64 + 0.25))
                .expect("interior quantile")
        })
        .collect();
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let raw = sample_mean(seed, 220, trials, move |rng| {
        let xs: Vec<f64> = shifts
            .iter()
            .map(|&m| sample_standard_normal(rng) + m)
            .collect();
        // importance weight: target N(0,1) over proposal N(m,1)
        let mut log_w = 0.0;
        for (x, m) in xs.iter().zip(&shifts) {
            log_w += -x * m + 0.5 * m * m;
        }
        let mut log_p = 0.0;
        for a in 0..xs.len() {
            for b in a + 1..xs.len() {
                log_p += ln_normal_cdf(xs[a] - xs[b]);
            }
        }
        (log_w + log_p).exp()
    });
    Ok(McEstimate {
        mean: factorial * raw.mean,
        stderr: factorial * raw.stderr,
        trials: raw.trials,
        seed: raw.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn vote_sample_joint_marginals() {
        let j = vote_sample_joint(0.25).unwrap();
        assert_eq!(j.arity(), 2);
        assert!((j.component(1).prob(1) - 0.75).abs() < 1e-15);
        for &rate in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let j = vote_sample_joint(rate).unwrap();
            let rho = j.maximal_correlation(&[0]).unwrap();
            assert!((rho - rate.sqrt()).abs() < 1e-10, "rate {rate}");
        }
        assert!(vote_sample_joint(1.5).is_err());
    }

    #[test]
    fn pairwise_vector_basics() {
        // one voter, identity ranks 0,1,2: candidate 1 outranks candidate 0
        let p = RankingProfile::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(p.pairwise_vector(1, 0).unwrap(), vec![1]);
        assert_eq!(p.pairwise_vector(0, 1).unwrap(), vec![-1]);
        assert!(p.pairwise_vector(0, 0).is_err());

        // antisymmetry on random profiles
        let mut rng = crate::mc::trial_rng(5, 70, 0);
        let p = RankingProfile::random_uniform(4, 9, &mut rng).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    let x = p.pairwise_vector(a, b).unwrap();
                    let y = p.pairwise_vector(b, a).unwrap();
                    assert!(x.iter().zip(&y).all(|(u, v)| *u == -v));
                }
            }
        }
    }

    #[test]
    fn pairwise_marginal_is_uniform_chi_square() {
        let trials = 100_000u64;
        let mut plus = 0u64;
        for t in 0..trials {
            let mut rng = crate::mc::trial_rng(17, 71, t);
            let rank = random_ranking(3, &mut rng);
            if rank[0] > rank[1] {
                plus += 1;
            }
        }
        let e = trials as f64 / 2.0;
        let chi2 = ((plus as f64 - e).powi(2) + ((trials - plus) as f64 - e).powi(2)) / e;
        assert!(chi2 < 15.0, "chi-square statistic {chi2}");
    }

    #[test]
    fn aggregate_examples() {
        // dictator follows voter 1's order and always yields a linear order
        let mut rng = crate::mc::trial_rng(6, 72, 0);
        let p = RankingProfile::random_uniform(5, 7, &mut rng).unwrap();
        let t = aggregate(&p, |x| x[0]).unwrap();
        assert!(t.acyclic() && t.uniq_max());
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    assert_eq!(t.beats(a, b), p.rankings()[0][a] > p.rankings()[0][b]);
                }
            }
        }

        // the classic three-voter cycle under majority
        let p = RankingProfile::new(
            3,
            vec![vec![2, 1, 0], vec![0, 2, 1], vec![1, 0, 2]],
        )
        .unwrap();
        let t = aggregate(&p, majority_rule).unwrap();
        assert!(!t.acyclic() && !t.uniq_max());
        assert!(t.beats(0, 1) && t.beats(1, 2) && t.beats(2, 0));

        // a non-antisymmetric rule is rejected
        assert!(aggregate(&p, |_| 1).is_err());
    }

    #[test]
    fn tournament_predicates() {
        // transitive order
        let t = Tournament::from_fn(4, |_, _| true).unwrap();
        assert!(t.acyclic() && t.uniq_max());
        // candidate 0 beats all, the rest form a cycle
        let t = Tournament::from_fn(4, |a, b| {
            if a == 0 {
                true
            } else {
                matches!((a, b), (1, 2) | (2, 3)) // 3 beats 1 closes the cycle
            }
        })
        .unwrap();
        assert!(t.uniq_max() && !t.acyclic());
        // acyclic implies uniq_max on all 64 k=4 tournaments
        for code in 0u32..64 {
            let mut bits = (0..6).map(|i| code >> i & 1 == 1).collect::<Vec<_>>();
            let mut it = bits.drain(..);
            let t = Tournament::from_fn(4, |_, _| it.next().unwrap()).unwrap();
            if t.acyclic() {
                assert!(t.uniq_max());
            }
        }
    }

    #[test]
    fn neutrality_and_reversal() {
        let mut rng = crate::mc::trial_rng(7, 73, 0);
        let p = RankingProfile::random_uniform(5, 11, &mut rng).unwrap();
        let t = aggregate(&p, majority_rule).unwrap();
        for perm in [vec![4, 3, 2, 1, 0], vec![1, 2, 0, 4, 3]] {
            let relabeled = aggregate(&p.relabel(&perm).unwrap(), majority_rule).unwrap();
            assert_eq!(relabeled, t.relabel(&perm).unwrap());
        }
        let reversed = aggregate(&p.reversed(), majority_rule).unwrap();
        assert_eq!(reversed, t.reverse());
    }

    #[test]
    fn predictability_dictator_matches_rate() {
        for &rate in &[0.1, 0.5, 0.9] {
            let est = predictability(101, rate, PredictRule::Dictator, 60_000, 3).unwrap();
            assert!(
                (est.mean - rate).abs() < 3.0 * est.stderr + 0.01,
                "rate {rate}: {} ± {}",
                est.mean,
                est.stderr
            );
        }
    }

    #[test]
    fn predictability_full_sample_is_exact() {
        let est = predictability(101, 1.0, PredictRule::Majority, 5_000, 4).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.stderr, 0.0);
        assert!(predictability(100, 0.5, PredictRule::Majority, 10, 0).is_err());
    }

    #[test]
    fn predictability_majority_arcsin() {
        let rho: f64 = 0.5;
        let est = predictability(2001, rho, PredictRule::Majority, 60_000, 5).unwrap();
        let want = 2.0 / PI * rho.sqrt().asin();
        assert!(
            (est.mean - want).abs() < 3.0 * est.stderr + 0.015,
            "{} vs {want}",
            est.mean
        );
    }

    #[test]
    fn condorcet_k3_uniqmax_equals_acyclic() {
        let est = condorcet_simulate(3, 501, 40_000, 6).unwrap();
        assert_eq!(est.uniq_max.mean, est.acyclic.mean);
        let guilbaud = 0.75 + 1.5 / PI * (1.0f64 / 3.0).asin();
        assert!(
            (est.acyclic.mean - guilbaud).abs() < 3.0 * est.acyclic.stderr + 0.02,
            "{} vs {guilbaud}",
            est.acyclic.mean
        );
    }

    #[test]
    fn condorcet_large_k_paths_agree() {
        // k = 6 exercises the per-voter path; compare against the type
        // multinomial path run at k = 5 for sanity of both branches
        let a = condorcet_simulate(5, 101, 20_000, 7).unwrap();
        let b = condorcet_simulate(6, 101, 20_000, 7).unwrap();
        assert!(a.uniq_max.mean > b.uniq_max.mean);
        assert!(condorcet_simulate(2, 101, 100, 0).is_err());
        assert!(condorcet_simulate(3, 100, 100, 0).is_err());
    }

    #[test]
    fn condorcet_rho_closed_form_matches_enumeration() {
        assert!((condorcet_rho(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((condorcet_rho(3).unwrap() - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        let mut prev = 0.0;
        for r in 2..=6 {
            let closed = condorcet_rho(r).unwrap();
            let enumerated = condorcet_rho_enumerated(r).unwrap();
            assert!(
                (closed - enumerated).abs() < 1e-12,
                "r={r}: {closed} vs {enumerated}"
            );
            assert!(closed <= 1.0 / 3.0f64.sqrt() + 1e-15);
            assert!(closed > prev);
            prev = closed;
        }
        assert!(condorcet_rho(1).is_err());
    }

    #[test]
    fn gaussian_linear_order_small_k() {
        let est = gaussian_linear_order_probability(3, 200_000, 8).unwrap();
        let want = 0.75 + 1.5 / PI * (1.0f64 / 3.0).asin();
        assert!(
            (est.mean - want).abs() < 3.0 * est.stderr + 0.01,
            "{} ± {} vs {want}",
            est.mean,
            est.stderr
        );
    }
}
