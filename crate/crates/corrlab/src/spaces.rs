//! Finite probability spaces, joint distributions over products of them,
//! Markov operators, and maximal-correlation structure.
//!
//! A [`JointDistribution`] stores a dense probability tensor over the
//! product of its component spaces (sizes in scope stay below ~10^6
//! entries). Maximal correlation between two sides of a bipartition is
//! computed as the second singular value of the conditional-expectation
//! operator written in orthonormal bases of the two marginal L² spaces,
//! which reduces to the SVD of `D_p^{-1/2} P D_q^{-1/2}`.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Probability-sum and marginal-consistency tolerance.
pub const MASS_TOL: f64 = 1e-12;
/// Tolerance for factorization checks in r-wise independence.
pub const INDEPENDENCE_TOL: f64 = 1e-10;
/// Dense tensors larger than this are rejected.
pub const MAX_TENSOR_LEN: usize = 1 << 24;

/// A finite set of labelled atoms with a probability for each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    atoms: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteSpace {
    pub fn new<S: Into<String>>(atoms: Vec<S>, probs: Vec<f64>) -> Result<Self> {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        if atoms.is_empty() {
            return Err(Error::InvalidSpace("space must have at least one atom".into()));
        }
        if atoms.len() != probs.len() {
            return Err(Error::InvalidSpace(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|b| b == a) {
                return Err(Error::InvalidSpace(format!("duplicate atom label {a:?}")));
            }
        }
        if probs.iter().any(|&p| p < 0.0 || p.is_nan()) {
            return Err(Error::InvalidSpace("negative or NaN probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidSpace(format!(
                "probabilities sum to {total}, not 1 within {MASS_TOL}"
            )));
        }
        Ok(Self { atoms, probs })
    }

    /// Uniform measure over the given labels.
    pub fn uniform<S: Into<String>>(atoms: Vec<S>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Uniform measure over `{-1, +1}`.
    pub fn uniform_bit() -> Self {
        Self::uniform(vec!["-1", "+1"]).expect("static space")
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, atom: usize) -> f64 {
        self.probs[atom]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == label)
    }

    /// Number of atoms with strictly positive mass.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Smallest strictly positive atom probability.
    pub fn min_positive_prob(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Row-major index helpers shared by tensors and tables.
pub(crate) fn ravel(index: &[usize], dims: &[usize]) -> usize {
    debug_assert_eq!(index.len(), dims.len());
    let mut flat = 0;
    for (i, d) in index.iter().zip(dims) {
        debug_assert!(i < d);
        flat = flat * d + i;
    }
    flat
}

pub(crate) fn unravel(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for (slot, d) in idx.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    idx
}

/// Advances a mixed-radix odometer; returns false after the last index.
pub(crate) fn next_index(index: &mut [usize], dims: &[usize]) -> bool {
    for axis in (0..index.len()).rev() {
        index[axis] += 1;
        if index[axis] < dims[axis] {
            return true;
        }
        index[axis] = 0;
    }
    false
}

/// A probability tensor over a product of component spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    components: Vec<FiniteSpace>,
    tensor: Vec<f64>,
    dims: Vec<usize>,
    alpha: f64,
}

/// Result of the connectivity-based correlation bound for `k = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CheegerBound {
    /// Support graph is connected; maximal correlation is at most this.
    Bound(f64),
    /// Support graph is disconnected; the bound does not apply.
    NotConnected,
}

/// Outcome of an r-wise independence check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceCheck {
    pub holds: bool,
    /// Worst absolute deviation of a subset marginal from the product form.
    pub max_violation: f64,
}

/// Correlation summary of a joint distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    /// Maximum over single-component-versus-rest bipartitions.
    pub overall_rho: f64,
    /// Entry `i` is the correlation between components `1..=i+1` and the rest.
    pub vector_rho: Vec<f64>,
    /// Pairwise correlations; diagonal is 1.
    pub pairwise_rho: Vec<Vec<f64>>,
    /// Components whose marginal carries fewer than two positive atoms;
    /// correlations involving only such a side are 0 by convention.
    pub degenerate_components: Vec<usize>,
}

impl JointDistribution {
    /// Builds a joint from component spaces and a dense row-major tensor,
    /// verifying mass, marginal consistency and the atom-probability floor.
    pub fn new(components: Vec<FiniteSpace>, tensor: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution("no components".into()));
        }
        let dims: Vec<usize> = components.iter().map(FiniteSpace::len).collect();
        let len: usize = dims.iter().product();
        if len > MAX_TENSOR_LEN {
            return Err(Error::SizeCapExceeded(format!(
                "tensor would have {len} entries (cap {MAX_TENSOR_LEN})"
            )));
        }
        if tensor.len() != len {
            return Err(Error::InvalidDistribution(format!(
                "tensor has {} entries, expected {len}",
                tensor.len()
            )));
        }
        if tensor.iter().any(|&p| p < 0.0 || p.is_nan()) {
            return Err(Error::InvalidDistribution(
                "negative or NaN tensor entry".into(),
            ));
        }
        let total: f64 = tensor.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "tensor mass is {total}, not 1 within {MASS_TOL}"
            )));
        }
        // marginal consistency
        for (axis, space) in components.iter().enumerate() {
            let marg = marginal_axis(&tensor, &dims, axis);
            for (a, (&got, &want)) in marg.iter().zip(space.probs()).enumerate() {
                if (got - want).abs() > MASS_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "marginal of component {axis} at atom {a} is {got}, \
                         space says {want}"
                    )));
                }
            }
        }
        let alpha = tensor
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            components,
            tensor,
            dims,
            alpha,
        })
    }

    /// Builds a joint from nonnegative weights, normalizing the mass and
    /// deriving each component's marginal law.
    pub fn from_weights(atom_labels: Vec<Vec<String>>, weights: Vec<f64>) -> Result<Self> {
        let dims: Vec<usize> = atom_labels.iter().map(Vec::len).collect();
        let len: usize = dims.iter().product();
        if weights.len() != len {
            return Err(Error::InvalidDistribution(format!(
                "{} weights for a {len}-cell tensor",
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0 || w.is_nan()) {
            return Err(Error::InvalidDistribution("negative or NaN weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("zero total weight".into()));
        }
        let tensor: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let components = atom_labels
            .into_iter()
            .enumerate()
            .map(|(axis, labels)| FiniteSpace::new(labels, marginal_axis(&tensor, &dims, axis)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components, tensor)
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn components(&self) -> &[FiniteSpace] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &FiniteSpace {
        &self.components[i]
    }

    pub fn tensor(&self) -> &[f64] {
        &self.tensor
    }

    /// Minimum probability over atoms of positive mass.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn prob(&self, index: &[usize]) -> f64 {
        self.tensor[ravel(index, &self.dims)]
    }

    fn check_subset(&self, subset: &[usize], what: &str) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::EmptySubset(format!("{what} needs a nonempty subset")));
        }
        for &i in subset {
            if i >= self.arity() {
                return Err(Error::IndexOutOfRange(format!(
                    "component {i} of a {}-component joint",
                    self.arity()
                )));
            }
        }
        for (pos, &i) in subset.iter().enumerate() {
            if subset[..pos].contains(&i) {
                return Err(Error::IndexOutOfRange(format!(
                    "component {i} listed twice in {what}"
                )));
            }
        }
        Ok(())
    }

    /// Sums out every axis not in `subset`; the result keeps the
    /// components in the order given.
    pub fn marginalize(&self, subset: &[usize]) -> Result<JointDistribution> {
        self.check_subset(subset, "marginalize")?;
        let new_dims: Vec<usize> = subset.iter().map(|&i| self.dims[i]).collect();
        let mut tensor = vec![0.0; new_dims.iter().product()];
        let mut index = vec![0; self.arity()];
        let mut flat = 0;
        loop {
            let target: Vec<usize> = subset.iter().map(|&i| index[i]).collect();
            tensor[ravel(&target, &new_dims)] += self.tensor[flat];
            if !next_index(&mut index, &self.dims) {
                break;
            }
            flat += 1;
        }
        let components = subset.iter().map(|&i| self.components[i].clone()).collect();
        JointDistribution::new(components, tensor)
    }

    /// Reorders the components.
    pub fn permute(&self, order: &[usize]) -> Result<JointDistribution> {
        if order.len() != self.arity() {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} for arity {}",
                order.len(),
                self.arity()
            )));
        }
        self.marginalize(order)
    }

    /// Row-stochastic conditional-probability matrix: rows indexed by
    /// atoms of component `to`, columns by atoms of component `from`.
    /// Applying it to a function table on the `from` space realizes
    /// `x ↦ E[f(Y) | X = x]`.
    pub fn markov_matrix(&self, from: usize, to: usize) -> Result<DMatrix<f64>> {
        if from == to {
            return Err(Error::InvalidParameter(
                "markov_matrix requires from != to".into(),
            ));
        }
        self.check_subset(&[from, to], "markov_matrix")?;
        let pair = self.marginalize(&[to, from])?;
        let rows = self.dims[to];
        let cols = self.dims[from];
        let mut m = DMatrix::zeros(rows, cols);
        for x in 0..rows {
            let mass: f64 = (0..cols).map(|y| pair.tensor[x * cols + y]).sum();
            if mass <= 0.0 {
                return Err(Error::ZeroMassAtom(format!(
                    "atom {:?} of component {to} has zero marginal mass",
                    self.components[to].atoms()[x]
                )));
            }
            for y in 0..cols {
                m[(x, y)] = pair.tensor[x * cols + y] / mass;
            }
        }
        Ok(m)
    }

    /// Flattens the tensor to a matrix with rows indexed by assignments of
    /// `left` and columns by assignments of the complement.
    fn bipartition_matrix(&self, left: &[usize]) -> Result<(DMatrix<f64>, Vec<usize>)> {
        self.check_subset(left, "bipartition")?;
        let right: Vec<usize> = (0..self.arity()).filter(|i| !left.contains(i)).collect();
        if right.is_empty() {
            return Err(Error::EmptySubset(
                "bipartition complement must be nonempty".into(),
            ));
        }
        let ldims: Vec<usize> = left.iter().map(|&i| self.dims[i]).collect();
        let rdims: Vec<usize> = right.iter().map(|&i| self.dims[i]).collect();
        let (rows, cols) = (ldims.iter().product(), rdims.iter().product());
        let mut m = DMatrix::zeros(rows, cols);
        let mut index = vec![0; self.arity()];
        let mut flat = 0;
        loop {
            let li: Vec<usize> = left.iter().map(|&i| index[i]).collect();
            let ri: Vec<usize> = right.iter().map(|&i| index[i]).collect();
            m[(ravel(&li, &ldims), ravel(&ri, &rdims))] += self.tensor[flat];
            if !next_index(&mut index, &self.dims) {
                break;
            }
            flat += 1;
        }
        Ok((m, right))
    }

    /// Maximal correlation between the components in `left` and the rest:
    /// the supremum of `Cov[f, g]` over unit-variance functions of the two
    /// sides. A side carrying at most one positive atom admits only
    /// constant functions and yields 0 by convention.
    pub fn maximal_correlation(&self, left: &[usize]) -> Result<f64> {
        let (m, _right) = self.bipartition_matrix(left)?;
        Ok(second_singular_value(&m))
    }

    /// Full correlation summary: prefix-vs-suffix vector, the overall
    /// single-vs-rest maximum, and all pairwise values.
    pub fn correlation_report(&self) -> Result<CorrelationReport> {
        let k = self.arity();
        if k < 2 {
            return Err(Error::InvalidParameter(
                "correlation_report requires at least two components".into(),
            ));
        }
        let mut vector_rho = Vec::with_capacity(k - 1);
        for i in 1..k {
            let prefix: Vec<usize> = (0..i).collect();
            vector_rho.push(self.maximal_correlation(&prefix)?);
        }
        let mut overall_rho: f64 = 0.0;
        for i in 0..k {
            overall_rho = overall_rho.max(self.maximal_correlation(&[i])?);
        }
        let mut pairwise_rho = vec![vec![0.0; k]; k];
        #[allow(clippy::needless_range_loop)]
        for i in 0..k {
            pairwise_rho[i][i] = 1.0;
            for j in i + 1..k {
                let rho = self.marginalize(&[i, j])?.maximal_correlation(&[0])?;
                pairwise_rho[i][j] = rho;
                pairwise_rho[j][i] = rho;
            }
        }
        let degenerate_components = (0..k)
            .filter(|&i| self.components[i].support_size() < 2)
            .collect();
        Ok(CorrelationReport {
            overall_rho,
            vector_rho,
            pairwise_rho,
            degenerate_components,
        })
    }

    /// Checks whether every marginal on at most `r` components factorizes
    /// (within `1e-10`), reporting the worst violation found.
    pub fn r_wise_independence(&self, r: usize) -> Result<IndependenceCheck> {
        let k = self.arity();
        if r == 0 || r > k {
            return Err(Error::InvalidParameter(format!(
                "r must lie in 1..={k}, got {r}"
            )));
        }
        let mut max_violation: f64 = 0.0;
        for mask in 1u64..(1 << k) {
            let size = mask.count_ones() as usize;
            if size < 2 || size > r {
                continue;
            }
            let subset: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
            let marg = self.marginalize(&subset)?;
            let mut index = vec![0; subset.len()];
            let mut flat = 0;
            loop {
                let product: f64 = subset
                    .iter()
                    .zip(&index)
                    .map(|(&c, &a)| self.components[c].prob(a))
                    .product();
                max_violation = max_violation.max((marg.tensor[flat] - product).abs());
                if !next_index(&mut index, marg.dims()) {
                    break;
                }
                flat += 1;
            }
        }
        Ok(IndependenceCheck {
            holds: max_violation <= INDEPENDENCE_TOL,
            max_violation,
        })
    }

    /// Connectivity-based correlation bound for two components: if the
    /// bipartite support graph is connected the maximal correlation is at
    /// most `1 − α²/2`.
    pub fn cheeger_bound(&self) -> Result<CheegerBound> {
        if self.arity() != 2 {
            return Err(Error::InvalidParameter(format!(
                "cheeger_bound requires arity 2, got {}",
                self.arity()
            )));
        }
        let (rows, cols) = (self.dims[0], self.dims[1]);
        // union-find over positive-marginal atoms, edges where P(a,b) > 0
        let mut parent: Vec<usize> = (0..rows + cols).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for a in 0..rows {
            for b in 0..cols {
                if self.tensor[a * cols + b] > 0.0 {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, rows + b));
                    parent[ra] = rb;
                }
            }
        }
        let live: Vec<usize> = (0..rows)
            .filter(|&a| self.components[0].prob(a) > 0.0)
            .chain((rows..rows + cols).filter(|&b| self.components[1].prob(b - rows) > 0.0))
            .collect();
        let mut roots: Vec<usize> = live.iter().map(|&x| find(&mut parent, x)).collect();
        roots.dedup();
        roots.sort_unstable();
        roots.dedup();
        if roots.len() == 1 {
            Ok(CheegerBound::Bound(1.0 - self.alpha * self.alpha / 2.0))
        } else {
            Ok(CheegerBound::NotConnected)
        }
    }

    /// Product measure of several joints with equal arity; component `j`
    /// of the result is the product of the factors' `j`-th components.
    pub fn tensor_product(joints: &[JointDistribution]) -> Result<JointDistribution> {
        let Some(first) = joints.first() else {
            return Err(Error::EmptySubset("tensor_product of no joints".into()));
        };
        let k = first.arity();
        for j in joints {
            if j.arity() != k {
                return Err(Error::DimensionMismatch(format!(
                    "tensor_product arity mismatch: {} vs {k}",
                    j.arity()
                )));
            }
        }
        let mut acc = first.clone();
        for next in &joints[1..] {
            acc = acc.tensor_pair(next)?;
        }
        Ok(acc)
    }

    #[allow(clippy::needless_range_loop)]
    fn tensor_pair(&self, other: &JointDistribution) -> Result<JointDistribution> {
        let k = self.arity();
        let new_dims: Vec<usize> = (0..k).map(|j| self.dims[j] * other.dims[j]).collect();
        let len: usize = new_dims.iter().product();
        if len > MAX_TENSOR_LEN {
            return Err(Error::SizeCapExceeded(format!(
                "tensor product would have {len} entries (cap {MAX_TENSOR_LEN})"
            )));
        }
        let labels: Vec<Vec<String>> = (0..k)
            .map(|j| {
                let mut v = Vec::with_capacity(new_dims[j]);
                for a in self.components[j].atoms() {
                    for b in other.components[j].atoms() {
                        v.push(format!("{a}|{b}"));
                    }
                }
                v
            })
            .collect();
        let mut weights = vec![0.0; len];
        let mut index = vec![0; k];
        let mut flat = 0;
        loop {
            let mut ai = Vec::with_capacity(k);
            let mut bi = Vec::with_capacity(k);
            for j in 0..k {
                ai.push(index[j] / other.dims[j]);
                bi.push(index[j] % other.dims[j]);
            }
            weights[flat] =
                self.tensor[ravel(&ai, &self.dims)] * other.tensor[ravel(&bi, &other.dims)];
            if !next_index(&mut index, &new_dims) {
                break;
            }
            flat += 1;
        }
        JointDistribution::from_weights(labels, weights)
    }

    /// Coarsens component `c` by merging atom `b` into atom `a`.
    pub fn merge_atoms(&self, c: usize, a: usize, b: usize) -> Result<JointDistribution> {
        self.check_subset(&[c], "merge_atoms")?;
        if a == b || a >= self.dims[c] || b >= self.dims[c] {
            return Err(Error::IndexOutOfRange(format!(
                "merge_atoms atoms {a},{b} in component of size {}",
                self.dims[c]
            )));
        }
        let mut labels: Vec<Vec<String>> = self
            .components
            .iter()
            .map(|s| s.atoms().to_vec())
            .collect();
        labels[c].remove(b);
        let new_dims: Vec<usize> = labels.iter().map(Vec::len).collect();
        let mut weights = vec![0.0; new_dims.iter().product()];
        let mut index = vec![0; self.arity()];
        let mut flat = 0;
        loop {
            let mut target = index.clone();
            if target[c] == b {
                target[c] = a;
            }
            if target[c] > b {
                target[c] -= 1;
            } else if target[c] == a && a > b {
                target[c] = a - 1;
            }
            weights[ravel(&target, &new_dims)] += self.tensor[flat];
            if !next_index(&mut index, &self.dims) {
                break;
            }
            flat += 1;
        }
        JointDistribution::from_weights(labels, weights)
    }
}

fn marginal_axis(tensor: &[f64], dims: &[usize], axis: usize) -> Vec<f64> {
    let mut out = vec![0.0; dims[axis]];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    for o in 0..outer {
        for (a, slot) in out.iter_mut().enumerate() {
            let base = (o * dims[axis] + a) * inner;
            *slot += tensor[base..base + inner].iter().sum::<f64>();
        }
    }
    out
}

/// Second singular value of `D_p^{-1/2} P D_q^{-1/2}` restricted to the
/// positive-mass atoms; 0 when either side is degenerate.
fn second_singular_value(joint: &DMatrix<f64>) -> f64 {
    let p: Vec<f64> = joint.row_iter().map(|r| r.sum()).collect();
    let q: Vec<f64> = joint.column_iter().map(|c| c.sum()).collect();
    let rows: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let cols: Vec<usize> = (0..q.len()).filter(|&j| q[j] > 0.0).collect();
    if rows.len() < 2 || cols.len() < 2 {
        return 0.0;
    }
    let mut m = DMatrix::zeros(rows.len(), cols.len());
    for (ri, &i) in rows.iter().enumerate() {
        for (ci, &j) in cols.iter().enumerate() {
            m[(ri, ci)] = joint[(i, j)] / (p[i] * q[j]).sqrt();
        }
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    let rho = sv.get(1).copied().unwrap_or(0.0).clamp(0.0, 1.0);
    if rho >= 1.0 - 1e-12 {
        1.0
    } else {
        rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::social_choice::{condorcet_status_joint, vote_sample_joint};
    use rand::Rng;

    fn uniform_pair() -> JointDistribution {
        JointDistribution::from_weights(
            vec![
                vec!["-1".into(), "+1".into()],
                vec!["-1".into(), "+1".into()],
            ],
            vec![0.25; 4],
        )
        .unwrap()
    }

    fn diagonal_pair(m: usize) -> JointDistribution {
        let labels: Vec<String> = (0..m).map(|i| i.to_string()).collect();
        let mut weights = vec![0.0; m * m];
        for i in 0..m {
            weights[i * m + i] = 1.0;
        }
        JointDistribution::from_weights(vec![labels.clone(), labels], weights).unwrap()
    }

    /// Correlated bit pair: equal with probability `(1+rho)/2`.
    fn noisy_bits(rho: f64) -> JointDistribution {
        let stay = (1.0 + rho) / 4.0;
        let flip = (1.0 - rho) / 4.0;
        JointDistribution::from_weights(
            vec![
                vec!["-1".into(), "+1".into()],
                vec!["-1".into(), "+1".into()],
            ],
            vec![stay, flip, flip, stay],
        )
        .unwrap()
    }

    fn random_joint(seed: u64, dims: &[usize]) -> JointDistribution {
        let mut rng = crate::mc::trial_rng(seed, 50, 0);
        let len: usize = dims.iter().product();
        let weights: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
        let labels = dims
            .iter()
            .map(|&d| (0..d).map(|a| a.to_string()).collect())
            .collect();
        JointDistribution::from_weights(labels, weights).unwrap()
    }

    #[test]
    fn space_invariants() {
        assert!(FiniteSpace::new(vec!["a", "b"], vec![0.5, 0.5]).is_ok());
        assert!(FiniteSpace::new(vec!["a", "a"], vec![0.5, 0.5]).is_err());
        assert!(FiniteSpace::new(vec!["a", "b"], vec![0.6, 0.5]).is_err());
        assert!(FiniteSpace::new(vec!["a", "b"], vec![1.1, -0.1]).is_err());
    }

    #[test]
    fn joint_marginal_consistency_enforced() {
        let bad = JointDistribution::new(
            vec![FiniteSpace::uniform_bit(), FiniteSpace::uniform_bit()],
            vec![0.4, 0.1, 0.1, 0.4],
        );
        assert!(bad.is_ok());
        let bad = JointDistribution::new(
            vec![
                FiniteSpace::new(vec!["-1", "+1"], vec![0.3, 0.7]).unwrap(),
                FiniteSpace::uniform_bit(),
            ],
            vec![0.25; 4],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn marginalize_examples() {
        let j = uniform_pair();
        let m = j.marginalize(&[0]).unwrap();
        assert_eq!(m.arity(), 1);
        assert_eq!(m.tensor(), &[0.5, 0.5]);

        // vote marginal of the vote/sample space is uniform on ±1
        let vs = vote_sample_joint(0.5).unwrap();
        let vote = vs.marginalize(&[0]).unwrap();
        assert!(vote.tensor().iter().all(|&p| (p - 0.5).abs() < 1e-15));

        // identity case
        let all = vs.marginalize(&[0, 1]).unwrap();
        assert_eq!(all.tensor(), vs.tensor());

        assert!(vs.marginalize(&[]).is_err());
        assert!(vs.marginalize(&[3]).is_err());
    }

    #[test]
    fn marginalize_is_consistent_under_chaining() {
        let j = random_joint(1, &[2, 3, 2]);
        let direct = j.marginalize(&[0, 2]).unwrap();
        let chained = j.marginalize(&[0, 1, 2]).unwrap().marginalize(&[0, 2]).unwrap();
        for (a, b) in direct.tensor().iter().zip(chained.tensor()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn markov_matrix_examples() {
        // perfectly correlated copy: identity
        let m = diagonal_pair(2).markov_matrix(1, 0).unwrap();
        assert!((m[(0, 0)] - 1.0).abs() < 1e-15 && m[(0, 1)].abs() < 1e-15);

        // independent: every row is the `from` marginal
        let m = uniform_pair().markov_matrix(0, 1).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((m[(r, c)] - 0.5).abs() < 1e-15);
            }
        }

        // cyclic status triple (x¹˃², x²˃³, x³˃¹) of a uniform 3-order:
        // conditioned on discordant (x¹˃², x²˃³) the third status is even
        let j = cyclic_status_joint();
        let m = flatten_pair(&j).markov_matrix(1, 0).unwrap();
        // rows are (x12,x23) in row-major order: (-,-), (-,+), (+,-), (+,+)
        for discordant in [1usize, 2] {
            assert!((m[(discordant, 0)] - 0.5).abs() < 1e-12);
            assert!((m[(discordant, 1)] - 0.5).abs() < 1e-12);
        }
        // concordant statuses determine the third
        for (concordant, forced) in [(0usize, 1usize), (3, 0)] {
            assert!((m[(concordant, forced)] - 1.0).abs() < 1e-12);
        }

        // zero-mass conditioning atom
        let z = JointDistribution::new(
            vec![
                FiniteSpace::new(vec!["a", "b"], vec![1.0, 0.0]).unwrap(),
                FiniteSpace::uniform_bit(),
            ],
            vec![0.5, 0.5, 0.0, 0.0],
        )
        .unwrap();
        assert!(z.markov_matrix(1, 0).is_err());
        assert!(z.markov_matrix(0, 0).is_err());
    }

    /// Status triple with the cyclic orientation (1>2, 2>3, 3>1).
    fn cyclic_status_joint() -> JointDistribution {
        let labels: Vec<Vec<String>> = (0..3)
            .map(|_| vec!["-1".to_string(), "+1".to_string()])
            .collect();
        let mut weights = vec![0.0; 8];
        for rank_code in 0..6usize {
            // enumerate the 6 orders of three candidates
            let perms = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let rank = perms[rank_code];
            let idx = [
                usize::from(rank[0] > rank[1]),
                usize::from(rank[1] > rank[2]),
                usize::from(rank[2] > rank[0]),
            ];
            weights[ravel(&idx, &[2, 2, 2])] += 1.0;
        }
        JointDistribution::from_weights(labels, weights).unwrap()
    }

    /// Groups the first two components of a 3-component joint into one
    /// side; the row-major tensor layout is unchanged by the grouping.
    fn flatten_pair(j: &JointDistribution) -> JointDistribution {
        let mut labels = Vec::new();
        for a in j.component(0).atoms() {
            for b in j.component(1).atoms() {
                labels.push(format!("{a},{b}"));
            }
        }
        JointDistribution::from_weights(
            vec![labels, j.component(2).atoms().to_vec()],
            j.tensor().to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn maximal_correlation_examples() {
        assert!(uniform_pair().maximal_correlation(&[0]).unwrap().abs() < 1e-12);
        assert_eq!(diagonal_pair(3).maximal_correlation(&[0]).unwrap(), 1.0);

        let vs = vote_sample_joint(0.25).unwrap();
        assert!((vs.maximal_correlation(&[0]).unwrap() - 0.5).abs() < 1e-10);

        // uniform S3, rho between two pairwise-status coordinates is 1/3
        let j = condorcet_status_joint();
        let pair = j.marginalize(&[0, 1]).unwrap();
        assert!((pair.maximal_correlation(&[0]).unwrap() - 1.0 / 3.0).abs() < 1e-12);

        assert!(vs.maximal_correlation(&[]).is_err());
        assert!(vs.maximal_correlation(&[0, 1]).is_err());
    }

    #[test]
    fn degenerate_side_yields_zero() {
        let j = JointDistribution::new(
            vec![
                FiniteSpace::new(vec!["only"], vec![1.0]).unwrap(),
                FiniteSpace::uniform_bit(),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_eq!(j.maximal_correlation(&[0]).unwrap(), 0.0);
        let report = j.correlation_report().unwrap();
        assert_eq!(report.degenerate_components, vec![0]);
    }

    #[test]
    fn svd_matches_alternating_ascent_oracle() {
        // brute-force sup of Cov[f,g] by alternating conditional
        // expectations from random starts, independent of the SVD path
        for seed in 0..12u64 {
            let dims = [2 + (seed % 2) as usize, 2 + (seed % 3 != 0) as usize];
            let j = random_joint(seed + 10, &dims);
            let want = j.maximal_correlation(&[0]).unwrap();
            let got = ascent_oracle(&j);
            assert!(
                (want - got).abs() < 1e-6,
                "seed {seed}: svd {want} vs ascent {got}"
            );
        }
    }

    fn ascent_oracle(j: &JointDistribution) -> f64 {
        let (rows, cols) = (j.dims()[0], j.dims()[1]);
        let p: Vec<f64> = (0..rows)
            .map(|a| (0..cols).map(|b| j.tensor()[a * cols + b]).sum())
            .collect();
        let q: Vec<f64> = (0..cols)
            .map(|b| (0..rows).map(|a| j.tensor()[a * cols + b]).sum())
            .collect();
        let normalize = |v: &mut Vec<f64>, w: &[f64]| {
            let mean: f64 = v.iter().zip(w).map(|(x, m)| x * m).sum();
            v.iter_mut().for_each(|x| *x -= mean);
            let var: f64 = v.iter().zip(w).map(|(x, m)| x * x * m).sum();
            if var > 1e-300 {
                let s = var.sqrt();
                v.iter_mut().for_each(|x| *x /= s);
            }
        };
        let mut best: f64 = 0.0;
        for start in 0..8u64 {
            let mut rng = crate::mc::trial_rng(start, 51, 0);
            let mut g: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
            normalize(&mut g, &q);
            let mut cov = 0.0;
            for _ in 0..500 {
                // f(a) ∝ E[g | A = a]
                let mut f: Vec<f64> = (0..rows)
                    .map(|a| {
                        (0..cols)
                            .map(|b| j.tensor()[a * cols + b] * g[b])
                            .sum::<f64>()
                            / p[a]
                    })
                    .collect();
                normalize(&mut f, &p);
                g = (0..cols)
                    .map(|b| {
                        (0..rows)
                            .map(|a| j.tensor()[a * cols + b] * f[a])
                            .sum::<f64>()
                            / q[b]
                    })
                    .collect();
                normalize(&mut g, &q);
                cov = (0..rows)
                    .map(|a| {
                        (0..cols)
                            .map(|b| j.tensor()[a * cols + b] * f[a] * g[b])
                            .sum::<f64>()
                    })
                    .sum();
            }
            best = best.max(cov.abs());
        }
        best
    }

    #[test]
    fn correlation_report_shapes() {
        let vs = vote_sample_joint(0.25).unwrap();
        let r = vs.correlation_report().unwrap();
        assert_eq!(r.vector_rho.len(), 1);
        assert!((r.vector_rho[0] - 0.5).abs() < 1e-10);
        assert!((r.overall_rho - 0.5).abs() < 1e-10);

        // independent k=3
        let j = JointDistribution::tensor_product(&[]).err();
        assert!(j.is_some());
        let indep = random_product_3();
        let r = indep.correlation_report().unwrap();
        assert!(r.vector_rho.iter().all(|&x| x < 1e-10));
        assert!(r.overall_rho < 1e-10);

        // S3 pairwise statuses: every pairwise rho is 1/3
        let r = condorcet_status_joint().correlation_report().unwrap();
        for i in 0..3 {
            for j2 in 0..3 {
                if i != j2 {
                    assert!((r.pairwise_rho[i][j2] - 1.0 / 3.0).abs() < 1e-10);
                }
            }
        }
    }

    fn random_product_3() -> JointDistribution {
        let labels: Vec<Vec<String>> = (0..3).map(|_| vec!["a".into(), "b".into()]).collect();
        let p = [0.3, 0.7, 0.6, 0.4, 0.5, 0.5];
        let mut weights = vec![0.0; 8];
        for (flat, w) in weights.iter_mut().enumerate() {
            let idx = unravel(flat, &[2, 2, 2]);
            *w = p[idx[0]] * p[2 + idx[1]] * p[4 + idx[2]];
        }
        JointDistribution::from_weights(labels, weights).unwrap()
    }

    #[test]
    fn r_wise_independence_examples() {
        // the status triple has uniform single marginals but its pairs
        // are 1/3-correlated, so only r = 1 holds
        let j = condorcet_status_joint();
        assert!(j.r_wise_independence(1).unwrap().holds);
        let c2 = j.r_wise_independence(2).unwrap();
        assert!(!c2.holds);
        assert!((c2.max_violation - 1.0 / 12.0).abs() < 1e-12);

        // (x, y, xy) on uniform bits: pairwise independent, 3-wise not
        let xor = JointDistribution::from_weights(
            (0..3).map(|_| vec!["-1".into(), "+1".into()]).collect(),
            (0..8)
                .map(|flat| {
                    let idx = unravel(flat, &[2, 2, 2]);
                    let (x, y, z) = (idx[0] == 1, idx[1] == 1, idx[2] == 1);
                    f64::from(z == (x == y))
                })
                .collect(),
        )
        .unwrap();
        assert!(xor.r_wise_independence(2).unwrap().holds);
        let c3 = xor.r_wise_independence(3).unwrap();
        assert!(!c3.holds);
        assert!((c3.max_violation - 0.125).abs() < 1e-12);

        let indep = random_product_3();
        assert!(indep.r_wise_independence(3).unwrap().holds);
        assert!(indep.r_wise_independence(4).is_err());
    }

    #[test]
    fn cheeger_examples() {
        // vote/sample at rho = 1/2: four positive atoms of mass 1/4
        let vs = vote_sample_joint(0.5).unwrap();
        match vs.cheeger_bound().unwrap() {
            CheegerBound::Bound(b) => {
                assert!((b - 31.0 / 32.0).abs() < 1e-12);
                let rho = vs.maximal_correlation(&[0]).unwrap();
                assert!((rho - 0.5f64.sqrt()).abs() < 1e-10);
                assert!(rho <= b + 1e-10);
            }
            CheegerBound::NotConnected => panic!("vote/sample support is connected"),
        }

        assert_eq!(
            diagonal_pair(2).cheeger_bound().unwrap(),
            CheegerBound::NotConnected
        );
        assert_eq!(diagonal_pair(2).maximal_correlation(&[0]).unwrap(), 1.0);

        match uniform_pair().cheeger_bound().unwrap() {
            CheegerBound::Bound(b) => {
                assert!((b - (1.0 - 0.25 * 0.25 / 2.0)).abs() < 1e-12);
                assert!(uniform_pair().maximal_correlation(&[0]).unwrap() <= b);
            }
            CheegerBound::NotConnected => panic!("full support is connected"),
        }
    }

    #[test]
    fn cheeger_dominates_on_random_joints() {
        for seed in 0..20u64 {
            let j = random_joint(seed + 100, &[3, 3]);
            if let CheegerBound::Bound(b) = j.cheeger_bound().unwrap() {
                assert!(j.maximal_correlation(&[0]).unwrap() <= b + 1e-10);
            }
        }
    }

    #[test]
    fn tensor_product_max_rule() {
        let a = vote_sample_joint(0.25).unwrap();
        let b = vote_sample_joint(0.49).unwrap();
        let prod = JointDistribution::tensor_product(&[a, b]).unwrap();
        let rho = prod.maximal_correlation(&[0]).unwrap();
        assert!((rho - 0.7).abs() < 1e-8, "rho = {rho}");

        // independent ⊗ independent stays independent
        let prod = JointDistribution::tensor_product(&[uniform_pair(), uniform_pair()]).unwrap();
        assert!(prod.maximal_correlation(&[0]).unwrap() < 1e-8);

        // single factor is the identity
        let single = JointDistribution::tensor_product(&[uniform_pair()]).unwrap();
        assert_eq!(single.tensor(), uniform_pair().tensor());
    }

    #[test]
    fn tensor_product_max_rule_random() {
        for seed in 0..8u64 {
            let a = random_joint(seed + 300, &[2, 3]);
            let b = random_joint(seed + 400, &[3, 2]);
            let want = a
                .maximal_correlation(&[0])
                .unwrap()
                .max(b.maximal_correlation(&[0]).unwrap());
            let got = JointDistribution::tensor_product(&[a, b])
                .unwrap()
                .maximal_correlation(&[0])
                .unwrap();
            assert!((want - got).abs() < 1e-8, "seed {seed}: {want} vs {got}");
        }
    }

    #[test]
    fn merging_atoms_never_increases_correlation() {
        for seed in 0..10u64 {
            let j = random_joint(seed + 500, &[3, 3]);
            let rho = j.maximal_correlation(&[0]).unwrap();
            for c in 0..2 {
                let merged = j.merge_atoms(c, 0, 2).unwrap();
                let rho2 = merged.maximal_correlation(&[0]).unwrap();
                assert!(
                    rho2 <= rho + 1e-10,
                    "seed {seed} comp {c}: {rho2} > {rho}"
                );
            }
        }
    }

    #[test]
    fn noisy_bits_rho_matches_parameter() {
        for &rho in &[0.1, 0.5, 0.9] {
            let j = noisy_bits(rho);
            assert!((j.maximal_correlation(&[0]).unwrap() - rho).abs() < 1e-12);
        }
    }
}
