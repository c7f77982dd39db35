//! Relations on `Ω^k`, their structural predicates, and counting
//! relation-satisfying tuples among product sets.
//!
//! Exact counting streams over `(members of R)^n` against bitset
//! indicator lookups and is capped at `|R|^n ≤ 10^8`; beyond the cap a
//! seeded Monte Carlo mode samples member tuples coordinatewise.

use crate::error::{Error, Result};
use crate::functions::ProductFunction;
use crate::mc::{sample_mean, McEstimate};
use crate::spaces::{next_index, FiniteSpace, JointDistribution};
use rand::Rng;
use serde::Serialize;

/// Cap on `|R|^n` for exact counting.
pub const MAX_EXACT_TUPLES: u128 = 100_000_000;
/// Cap on `|Ω|^n` for set bitsets (`n·log2|Ω| ≤ 27`).
pub const MAX_SET_CELLS: usize = 1 << 27;

/// A `k`-ary relation on a uniform base space, stored as the member list
/// plus a dense membership mask.
#[derive(Debug, Clone)]
pub struct Relation {
    base_size: usize,
    arity: usize,
    members: Vec<Vec<usize>>,
    membership: Vec<bool>,
}

impl Relation {
    pub fn new(base_size: usize, arity: usize, mut members: Vec<Vec<usize>>) -> Result<Self> {
        if base_size == 0 || arity == 0 {
            return Err(Error::InvalidParameter(
                "relation needs a nonempty base and positive arity".into(),
            ));
        }
        if members.is_empty() {
            return Err(Error::InvalidParameter("relation must be nonempty".into()));
        }
        let cells = base_size
            .checked_pow(arity as u32)
            .filter(|&c| c <= MAX_SET_CELLS)
            .ok_or_else(|| {
                Error::SizeCapExceeded(format!(
                    "relation table {base_size}^{arity} exceeds {MAX_SET_CELLS}"
                ))
            })?;
        let mut membership = vec![false; cells];
        members.sort();
        members.dedup();
        for t in &members {
            if t.len() != arity || t.iter().any(|&x| x >= base_size) {
                return Err(Error::IndexOutOfRange(format!(
                    "member {t:?} is not a valid {arity}-tuple over 0..{base_size}"
                )));
            }
            membership[Self::encode(t, base_size)] = true;
        }
        Ok(Self {
            base_size,
            arity,
            members,
            membership,
        })
    }

    /// Builds a relation from a membership predicate on atom tuples.
    pub fn from_predicate(
        base_size: usize,
        arity: usize,
        pred: impl Fn(&[usize]) -> bool,
    ) -> Result<Self> {
        let mut members = Vec::new();
        let dims = vec![base_size; arity];
        let mut index = vec![0usize; arity];
        loop {
            if pred(&index) {
                members.push(index.clone());
            }
            if !next_index(&mut index, &dims) {
                break;
            }
        }
        Self::new(base_size, arity, members)
    }

    fn encode(tuple: &[usize], base: usize) -> usize {
        tuple.iter().fold(0, |acc, &x| acc * base + x)
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        tuple.len() == self.arity
            && tuple.iter().all(|&x| x < self.base_size)
            && self.membership[Self::encode(tuple, self.base_size)]
    }

    /// Marginal of coordinate `i` under the uniform measure on members.
    pub fn marginal(&self, i: usize) -> Result<Vec<f64>> {
        if i >= self.arity {
            return Err(Error::IndexOutOfRange(format!(
                "coordinate {i} of {}",
                self.arity
            )));
        }
        let mut counts = vec![0usize; self.base_size];
        for t in &self.members {
            counts[t[i]] += 1;
        }
        let total = self.members.len() as f64;
        Ok(counts.iter().map(|&c| c as f64 / total).collect())
    }

    /// True when every coordinate marginal is uniform on the base.
    pub fn has_uniform_marginals(&self) -> Result<bool> {
        let want = 1.0 / self.base_size as f64;
        for i in 0..self.arity {
            if self
                .marginal(i)?
                .iter()
                .any(|&p| (p - want).abs() > 1e-12)
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// BFS over members with single-coordinate moves.
    pub fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.membership.len()];
        let start = Self::encode(&self.members[0], self.base_size);
        visited[start] = true;
        let mut queue = vec![self.members[0].clone()];
        let mut seen = 1usize;
        while let Some(tuple) = queue.pop() {
            for coord in 0..self.arity {
                let mut probe = tuple.clone();
                for value in 0..self.base_size {
                    if value == tuple[coord] {
                        continue;
                    }
                    probe[coord] = value;
                    let code = Self::encode(&probe, self.base_size);
                    if self.membership[code] && !visited[code] {
                        visited[code] = true;
                        seen += 1;
                        queue.push(probe.clone());
                    }
                }
            }
        }
        seen == self.members.len()
    }

    /// Checks that every pair marginal under the uniform member measure
    /// factorizes within `1e-12`.
    pub fn is_pairwise_smooth(&self) -> bool {
        let total = self.members.len() as f64;
        for i in 0..self.arity {
            let pi = self.marginal(i).expect("valid coordinate");
            for j in i + 1..self.arity {
                let pj = self.marginal(j).expect("valid coordinate");
                let mut pair = vec![0.0; self.base_size * self.base_size];
                for t in &self.members {
                    pair[t[i] * self.base_size + t[j]] += 1.0 / total;
                }
                for a in 0..self.base_size {
                    for b in 0..self.base_size {
                        if (pair[a * self.base_size + b] - pi[a] * pj[b]).abs() > 1e-12 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Uniform measure on members as a `k`-component joint distribution.
    pub fn to_joint(&self) -> Result<JointDistribution> {
        let labels: Vec<Vec<String>> = (0..self.arity)
            .map(|_| (0..self.base_size).map(|a| a.to_string()).collect())
            .collect();
        let weights: Vec<f64> = self.membership.iter().map(|&m| f64::from(m)).collect();
        JointDistribution::from_weights(labels, weights)
    }
}

/// A linear relation `Σ coeffs[i]·x_i mod m ∈ targets` with every
/// coefficient nonzero and coprime to the modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearRelation {
    pub modulus: usize,
    pub arity: usize,
    pub coeffs: Vec<usize>,
    pub targets: Vec<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl LinearRelation {
    pub fn new(modulus: usize, coeffs: Vec<usize>, targets: Vec<usize>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidParameter(format!(
                "modulus must be at least 2, got {modulus}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("at least one coefficient".into()));
        }
        for &c in &coeffs {
            let c = c % modulus;
            if c == 0 || gcd(c, modulus) != 1 {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {c} must be nonzero and coprime to {modulus}"
                )));
            }
        }
        let mut targets: Vec<usize> = targets.iter().map(|&t| t % modulus).collect();
        targets.sort_unstable();
        targets.dedup();
        if targets.is_empty() {
            return Err(Error::InvalidParameter("target set must be nonempty".into()));
        }
        let arity = coeffs.len();
        Ok(Self {
            modulus,
            arity,
            coeffs,
            targets,
        })
    }

    /// Sum relation with all coefficients 1.
    pub fn sum(modulus: usize, arity: usize, targets: Vec<usize>) -> Result<Self> {
        Self::new(modulus, vec![1; arity], targets)
    }

    pub fn satisfied(&self, tuple: &[usize]) -> bool {
        let s = tuple
            .iter()
            .zip(&self.coeffs)
            .fold(0usize, |acc, (&x, &c)| (acc + x * c) % self.modulus);
        self.targets.binary_search(&s).is_ok()
    }

    pub fn to_relation(&self) -> Result<Relation> {
        Relation::from_predicate(self.modulus, self.arity, |t| self.satisfied(t))
    }

    /// `m^(k−1)·|targets|`, the number of solutions per coordinate block.
    pub fn solutions_per_block(&self) -> u128 {
        (self.modulus as u128).pow(self.arity as u32 - 1) * self.targets.len() as u128
    }
}

/// A subset of `Ω^n` stored as a bitset over base-`m` digit strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSet {
    m: usize,
    n: usize,
    bits: Vec<u64>,
}

impl AtomSet {
    fn cells_checked(m: usize, n: usize) -> Result<usize> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(
                "sets need a nonempty base and positive dimension".into(),
            ));
        }
        m.checked_pow(n as u32)
            .filter(|&c| c <= MAX_SET_CELLS)
            .ok_or_else(|| {
                Error::SizeCapExceeded(format!("set table {m}^{n} exceeds {MAX_SET_CELLS}"))
            })
    }

    pub fn empty(m: usize, n: usize) -> Result<Self> {
        let cells = Self::cells_checked(m, n)?;
        Ok(Self {
            m,
            n,
            bits: vec![0; cells.div_ceil(64)],
        })
    }

    pub fn full(m: usize, n: usize) -> Result<Self> {
        let cells = Self::cells_checked(m, n)?;
        let mut s = Self::empty(m, n)?;
        for i in 0..cells {
            s.bits[i / 64] |= 1 << (i % 64);
        }
        Ok(s)
    }

    /// Builds a set from sorted (or unsorted) flat atom-tuple indices.
    pub fn from_indices(m: usize, n: usize, indices: &[usize]) -> Result<Self> {
        let cells = Self::cells_checked(m, n)?;
        let mut s = Self::empty(m, n)?;
        for &i in indices {
            if i >= cells {
                return Err(Error::IndexOutOfRange(format!(
                    "tuple index {i} of {cells}"
                )));
            }
            s.bits[i / 64] |= 1 << (i % 64);
        }
        Ok(s)
    }

    pub fn from_predicate(m: usize, n: usize, pred: impl Fn(&[usize]) -> bool) -> Result<Self> {
        let _ = Self::cells_checked(m, n)?;
        let mut s = Self::empty(m, n)?;
        let dims = vec![m; n];
        let mut index = vec![0usize; n];
        let mut flat = 0usize;
        loop {
            if pred(&index) {
                s.bits[flat / 64] |= 1 << (flat % 64);
            }
            if !next_index(&mut index, &dims) {
                break;
            }
            flat += 1;
        }
        Ok(s)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        let flat = tuple.iter().fold(0, |acc, &x| acc * self.m + x);
        self.contains_index(flat)
    }

    pub fn cardinality(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn density(&self) -> f64 {
        self.cardinality() as f64 / self.cells() as f64
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.cells()).filter(|&i| self.contains_index(i)).collect()
    }

    pub fn is_subset_of(&self, other: &AtomSet) -> bool {
        self.m == other.m
            && self.n == other.n
            && self
                .bits
                .iter()
                .zip(&other.bits)
                .all(|(a, b)| a & !b == 0)
    }

    /// Indicator as a table function over the uniform base measure.
    pub fn indicator(&self) -> Result<ProductFunction> {
        let labels: Vec<String> = (0..self.m).map(|a| a.to_string()).collect();
        let space = FiniteSpace::uniform(labels)?;
        let values: Vec<f64> = (0..self.cells())
            .map(|i| f64::from(self.contains_index(i)))
            .collect();
        ProductFunction::new(vec![space; self.n], values)
    }
}

/// Exterior and interior `S`-closures: the smallest fiber union
/// containing the set, and the largest contained in it.
pub fn set_closure(a: &AtomSet, s: &[usize]) -> Result<(AtomSet, AtomSet)> {
    for &i in s {
        if i >= a.n() {
            return Err(Error::IndexOutOfRange(format!(
                "coordinate {i} of {}",
                a.n()
            )));
        }
    }
    let mut upper = a.clone();
    let mut lower = a.clone();
    let dims = vec![a.m(); a.n()];
    for &axis in s {
        let outer: usize = dims[..axis].iter().product();
        let m = a.m();
        let inner: usize = dims[axis + 1..].iter().product();
        let (mut up_next, mut lo_next) = (upper.clone(), lower.clone());
        for o in 0..outer {
            for j in 0..inner {
                let mut any = false;
                let mut all = true;
                for v in 0..m {
                    let flat = (o * m + v) * inner + j;
                    any |= upper.contains_index(flat);
                    all &= lower.contains_index(flat);
                }
                for v in 0..m {
                    let flat = (o * m + v) * inner + j;
                    set_bit(&mut up_next.bits, flat, any);
                    set_bit(&mut lo_next.bits, flat, all);
                }
            }
        }
        upper = up_next;
        lower = lo_next;
    }
    Ok((upper, lower))
}

fn set_bit(bits: &mut [u64], i: usize, value: bool) {
    if value {
        bits[i / 64] |= 1 << (i % 64);
    } else {
        bits[i / 64] &= !(1 << (i % 64));
    }
}

/// Exact number of tuples `(x¹,…,x^k) ∈ A_1 × … × A_k` satisfying the
/// relation in every coordinate, by streaming over `R^n`.
pub fn count_tuples(sets: &[AtomSet], relation: &Relation, n: usize) -> Result<u64> {
    let k = relation.arity();
    if sets.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} sets for an arity-{k} relation",
            sets.len()
        )));
    }
    for (j, a) in sets.iter().enumerate() {
        if a.m() != relation.base_size() || a.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "set {j} is over {}^{}, relation wants {}^{n}",
                a.m(),
                a.n(),
                relation.base_size()
            )));
        }
    }
    let total = (relation.member_count() as u128)
        .checked_pow(n as u32)
        .filter(|&t| t <= MAX_EXACT_TUPLES)
        .ok_or_else(|| {
            Error::SizeCapExceeded(format!(
                "|R|^n = {}^{n} exceeds {MAX_EXACT_TUPLES}; use count_tuples_mc",
                relation.member_count()
            ))
        })?;
    let _ = total;
    let m = relation.base_size();
    let mut count = 0u64;
    // odometer over member choices per coordinate, with incremental
    // per-function flat indices
    let mut choice = vec![0usize; n];
    let members = relation.members();
    let mut stack_idx = vec![vec![0usize; k]; n + 1];
    let mut depth = 0usize;
    loop {
        while depth < n {
            let member = &members[choice[depth]];
            for j in 0..k {
                stack_idx[depth + 1][j] = stack_idx[depth][j] * m + member[j];
            }
            depth += 1;
        }
        if (0..k).all(|j| sets[j].contains_index(stack_idx[n][j])) {
            count += 1;
        }
        // advance odometer
        loop {
            if depth == 0 {
                return Ok(count);
            }
            depth -= 1;
            choice[depth] += 1;
            if choice[depth] < members.len() {
                break;
            }
            choice[depth] = 0;
        }
    }
}

/// Monte Carlo estimate of the same count: samples member tuples
/// coordinatewise-uniformly (the member measure of `R^n`) and scales by
/// `|R|^n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TupleCountEstimate {
    pub count: f64,
    pub stderr: f64,
    pub fraction: McEstimate,
}

pub fn count_tuples_mc(
    sets: &[AtomSet],
    relation: &Relation,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<TupleCountEstimate> {
    let k = relation.arity();
    if sets.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} sets for an arity-{k} relation",
            sets.len()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    for (j, a) in sets.iter().enumerate() {
        if a.m() != relation.base_size() || a.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "set {j} has the wrong shape for the relation"
            )));
        }
    }
    let m = relation.base_size();
    let members = relation.members();
    let fraction = sample_mean(seed, 401, trials, |rng| {
        let mut idx = vec![0usize; k];
        for _ in 0..n {
            let member = &members[rng.random_range(0..members.len())];
            for j in 0..k {
                idx[j] = idx[j] * m + member[j];
            }
        }
        f64::from((0..k).all(|j| sets[j].contains_index(idx[j])))
    });
    let scale = (members.len() as f64).powi(n as i32);
    Ok(TupleCountEstimate {
        count: fraction.mean * scale,
        stderr: fraction.stderr * scale,
        fraction,
    })
}

/// The random-set prediction `Π_j P[A_j] · (m^(k−1)·|targets|)^n` for a
/// linear relation.
pub fn predicted_count(sets: &[AtomSet], linear: &LinearRelation, n: usize) -> Result<f64> {
    if sets.len() != linear.arity {
        return Err(Error::DimensionMismatch(format!(
            "{} sets for an arity-{} relation",
            sets.len(),
            linear.arity
        )));
    }
    for a in sets {
        if a.m() != linear.modulus || a.n() != n {
            return Err(Error::DimensionMismatch(
                "set shape does not match the relation".into(),
            ));
        }
    }
    let density: f64 = sets.iter().map(AtomSet::density).product();
    Ok(density * (linear.solutions_per_block() as f64).powi(n as i32))
}

/// Regularizes a set's indicator: returns the touched coordinates and
/// the exterior/interior closures, whose indicators have all influences
/// below `tau`.
pub fn regularize_set(a: &AtomSet, tau: f64, alpha: f64) -> Result<(Vec<usize>, AtomSet, AtomSet)> {
    let result = crate::bounds::regularize(&[a.indicator()?], tau, alpha)?;
    let (upper, lower) = set_closure(a, &result.coordinates)?;
    Ok((result.coordinates, upper, lower))
}
