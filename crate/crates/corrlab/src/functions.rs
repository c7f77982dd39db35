//! Real-valued functions on finite product spaces: moments, influences,
//! Efron-Stein decompositions, multilinear expansions and noise operators.
//!
//! Dense tables are exact and capped in size; large-`n` work (majority
//! simulations, sparse polynomials) goes through structured evaluation
//! instead of tables.

use crate::error::{Error, Result};
use crate::gaussian::sample_standard_normal;
use crate::mc::{sample_mean, McEstimate};
use crate::spaces::{next_index, ravel, FiniteSpace, JointDistribution};
use rand::Rng;

/// Largest dense function table.
pub const MAX_TABLE_LEN: usize = 1 << 20;
/// Largest `n` for a full Efron-Stein decomposition.
pub const MAX_EFRON_STEIN_COORDS: usize = 14;

/// Orthonormal basis of `L²(Ω, μ)` built by Gram-Schmidt over indicator
/// functions in atom order with the constant function first. Vectors are
/// sign-normalized so the highest-index atom carries a nonnegative value;
/// on a uniform bit labelled `(-1, +1)` the non-constant vector is the
/// identity `x ↦ x`.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    /// `vectors[j][atom]`, `vectors[0]` constant 1.
    vectors: Vec<Vec<f64>>,
}

impl OrthonormalBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn value(&self, j: usize, atom: usize) -> f64 {
        self.vectors[j][atom]
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }
}

/// Builds the orthonormal basis of a fully supported space.
pub fn orthonormal_basis(space: &FiniteSpace) -> Result<OrthonormalBasis> {
    let m = space.len();
    let probs = space.probs();
    if probs.iter().any(|&p| p <= 0.0) {
        return Err(Error::ZeroMassAtom(
            "orthonormal basis requires full support".into(),
        ));
    }
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        u.iter().zip(v).zip(probs).map(|((a, b), p)| a * b * p).sum()
    };
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut candidates = vec![vec![1.0; m]];
    for a in 0..m {
        let mut e = vec![0.0; m];
        e[a] = 1.0;
        candidates.push(e);
    }
    for mut v in candidates {
        if vectors.len() == m {
            break;
        }
        for b in &vectors {
            let c = inner(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = inner(&v, &v).sqrt();
        if norm > 1e-9 {
            v.iter_mut().for_each(|x| *x /= norm);
            let last = v
                .iter()
                .rev()
                .find(|x| x.abs() > 1e-12)
                .copied()
                .unwrap_or(1.0);
            if last < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            vectors.push(v);
        }
    }
    debug_assert_eq!(vectors.len(), m);
    Ok(OrthonormalBasis { vectors })
}

/// A real-valued table over a product of finite spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFunction {
    domain: Vec<FiniteSpace>,
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl ProductFunction {
    pub fn new(domain: Vec<FiniteSpace>, values: Vec<f64>) -> Result<Self> {
        let dims: Vec<usize> = domain.iter().map(FiniteSpace::len).collect();
        let len: usize = dims.iter().product();
        if len > MAX_TABLE_LEN {
            return Err(Error::SizeCapExceeded(format!(
                "table would have {len} entries (cap {MAX_TABLE_LEN}); \
                 use a structured family instead"
            )));
        }
        if values.len() != len {
            return Err(Error::InvalidFunction(format!(
                "{} values for a {len}-cell table",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("non-finite table entry".into()));
        }
        Ok(Self {
            domain,
            dims,
            values,
        })
    }

    pub fn constant(domain: Vec<FiniteSpace>, c: f64) -> Result<Self> {
        let len = domain.iter().map(FiniteSpace::len).product();
        Self::new(domain, vec![c; len])
    }

    pub fn from_fn(domain: Vec<FiniteSpace>, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let dims: Vec<usize> = domain.iter().map(FiniteSpace::len).collect();
        let len: usize = dims.iter().product();
        if len > MAX_TABLE_LEN {
            return Err(Error::SizeCapExceeded(format!(
                "table would have {len} entries (cap {MAX_TABLE_LEN}); \
                 use a structured family instead"
            )));
        }
        let mut values = Vec::with_capacity(len);
        let mut index = vec![0; dims.len()];
        loop {
            values.push(f(&index));
            if !next_index(&mut index, &dims) {
                break;
            }
        }
        Self::new(domain, values)
    }

    /// `x ↦ x_coord` on `n` uniform `±1` bits.
    pub fn dictator(n: usize, coord: usize) -> Result<Self> {
        if coord >= n {
            return Err(Error::IndexOutOfRange(format!(
                "dictator coordinate {coord} of {n}"
            )));
        }
        let domain = vec![FiniteSpace::uniform_bit(); n];
        Self::from_fn(domain, |idx| if idx[coord] == 1 { 1.0 } else { -1.0 })
    }

    /// Sign of the bit sum on `n` uniform `±1` bits; `n` must be odd so
    /// ties cannot occur.
    pub fn majority(n: usize) -> Result<Self> {
        if n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "majority table requires odd n, got {n}"
            )));
        }
        let domain = vec![FiniteSpace::uniform_bit(); n];
        Self::from_fn(domain, |idx| {
            let sum: i64 = idx.iter().map(|&b| if b == 1 { 1 } else { -1 }).sum();
            if sum > 0 {
                1.0
            } else {
                -1.0
            }
        })
    }

    pub fn domain(&self) -> &[FiniteSpace] {
        &self.domain
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.domain.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: &[usize]) -> f64 {
        self.values[ravel(index, &self.dims)]
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.domain.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Probability of every point, in table order.
    pub fn point_weights(&self) -> Vec<f64> {
        let mut w = vec![1.0];
        for space in &self.domain {
            let mut next = Vec::with_capacity(w.len() * space.len());
            for &base in &w {
                for &p in space.probs() {
                    next.push(base * p);
                }
            }
            w = next;
        }
        w
    }

    pub fn expectation(&self) -> f64 {
        self.values
            .iter()
            .zip(self.point_weights())
            .map(|(v, w)| v * w)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let w = self.point_weights();
        let mean: f64 = self.values.iter().zip(&w).map(|(v, p)| v * p).sum();
        self.values
            .iter()
            .zip(&w)
            .map(|(v, p)| (v - mean) * (v - mean) * p)
            .sum::<f64>()
            .max(0.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.point_weights())
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt()
    }

    /// True when every value lies in `[0, 1]` up to `tol`.
    pub fn is_unit_range(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| (-tol..=1.0 + tol).contains(&v))
    }

    fn check_coord(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange(format!(
                "coordinate {i} of {}",
                self.n()
            )));
        }
        Ok(())
    }

    fn axis_splits(&self, axis: usize) -> (usize, usize, usize) {
        let outer: usize = self.dims[..axis].iter().product();
        let m = self.dims[axis];
        let inner: usize = self.dims[axis + 1..].iter().product();
        (outer, m, inner)
    }

    fn rest_weights(&self, axis: usize) -> (Vec<f64>, Vec<f64>) {
        let mut outer = vec![1.0];
        for space in &self.domain[..axis] {
            let mut next = Vec::with_capacity(outer.len() * space.len());
            for &b in &outer {
                for &p in space.probs() {
                    next.push(b * p);
                }
            }
            outer = next;
        }
        let mut inner = vec![1.0];
        for space in &self.domain[axis + 1..] {
            let mut next = Vec::with_capacity(inner.len() * space.len());
            for &b in &inner {
                for &p in space.probs() {
                    next.push(b * p);
                }
            }
            inner = next;
        }
        (outer, inner)
    }

    /// `Inf_i(f) = E[Var[f | X_j, j ≠ i]]`, computed directly from the
    /// conditional-variance definition.
    #[allow(clippy::needless_range_loop)]
    pub fn influence(&self, i: usize) -> Result<f64> {
        self.check_coord(i)?;
        let (outer, m, inner) = self.axis_splits(i);
        let probs = self.domain[i].probs();
        let (wo, wi) = self.rest_weights(i);
        let mut total = 0.0;
        for o in 0..outer {
            for j in 0..inner {
                let mut mean = 0.0;
                let mut sq = 0.0;
                for a in 0..m {
                    let v = self.values[(o * m + a) * inner + j];
                    mean += probs[a] * v;
                    sq += probs[a] * v * v;
                }
                total += wo[o] * wi[j] * (sq - mean * mean).max(0.0);
            }
        }
        Ok(total)
    }

    pub fn all_influences(&self) -> Result<Vec<f64>> {
        (0..self.n()).map(|i| self.influence(i)).collect()
    }

    #[allow(clippy::needless_range_loop)]
    fn fiber_op(&self, s: &[usize], op: FiberOp) -> Result<Self> {
        for &i in s {
            self.check_coord(i)?;
        }
        let mut out = self.clone();
        for &axis in s {
            let (outer, m, inner) = out.axis_splits(axis);
            let probs = out.domain[axis].probs().to_vec();
            let mut values = out.values.clone();
            for o in 0..outer {
                for j in 0..inner {
                    let mut acc = match op {
                        FiberOp::Sup => f64::NEG_INFINITY,
                        FiberOp::Inf => f64::INFINITY,
                        FiberOp::Avg => 0.0,
                    };
                    for a in 0..m {
                        let v = out.values[(o * m + a) * inner + j];
                        match op {
                            FiberOp::Sup => acc = acc.max(v),
                            FiberOp::Inf => acc = acc.min(v),
                            FiberOp::Avg => acc += probs[a] * v,
                        }
                    }
                    for a in 0..m {
                        values[(o * m + a) * inner + j] = acc;
                    }
                }
            }
            out.values = values;
        }
        Ok(out)
    }

    /// Pointwise supremum over the coordinates in `s`; the result is
    /// constant along every `s`-fiber.
    pub fn sup_over(&self, s: &[usize]) -> Result<Self> {
        self.fiber_op(s, FiberOp::Sup)
    }

    /// Pointwise infimum over the coordinates in `s`.
    pub fn inf_over(&self, s: &[usize]) -> Result<Self> {
        self.fiber_op(s, FiberOp::Inf)
    }

    /// Conditional expectation over the coordinates in `s`; preserves the
    /// mean and kills the influence of every coordinate in `s`.
    pub fn average_over(&self, s: &[usize]) -> Result<Self> {
        self.fiber_op(s, FiberOp::Avg)
    }
}

#[derive(Clone, Copy)]
enum FiberOp {
    Sup,
    Inf,
    Avg,
}

/// One orthogonal component of an Efron-Stein decomposition, stored
/// compactly over the spaces its subset selects.
#[derive(Debug, Clone)]
pub struct EfronSteinComponent {
    pub subset: Vec<usize>,
    pub function: ProductFunction,
}

/// `f = Σ_S f_S` with every `f_S` depending only on `x_S` and having
/// vanishing conditional mean on any non-superset of `S`.
#[derive(Debug, Clone)]
pub struct EfronSteinDecomposition {
    domain: Vec<FiniteSpace>,
    components: Vec<EfronSteinComponent>,
}

impl EfronSteinDecomposition {
    pub fn components(&self) -> &[EfronSteinComponent] {
        &self.components
    }

    pub fn domain(&self) -> &[FiniteSpace] {
        &self.domain
    }

    pub fn component(&self, subset: &[usize]) -> Option<&ProductFunction> {
        self.components
            .iter()
            .find(|c| c.subset == subset)
            .map(|c| &c.function)
    }

    /// Broadcasts the component for `subset` to the full domain.
    pub fn component_full(&self, subset: &[usize]) -> Result<ProductFunction> {
        let compact = self.component(subset).ok_or_else(|| {
            Error::IndexOutOfRange(format!("no component for subset {subset:?}"))
        })?;
        broadcast(compact, subset, &self.domain)
    }

    /// Sums all components back into a full table.
    pub fn reconstruct(&self) -> Result<ProductFunction> {
        let dims: Vec<usize> = self.domain.iter().map(FiniteSpace::len).collect();
        let mut values = vec![0.0; dims.iter().product()];
        for c in &self.components {
            let full = broadcast(&c.function, &c.subset, &self.domain)?;
            values.iter_mut().zip(full.values()).for_each(|(a, b)| *a += b);
        }
        ProductFunction::new(self.domain.clone(), values)
    }
}

fn broadcast(
    compact: &ProductFunction,
    subset: &[usize],
    domain: &[FiniteSpace],
) -> Result<ProductFunction> {
    let dims: Vec<usize> = domain.iter().map(FiniteSpace::len).collect();
    let compact_dims = compact.dims().to_vec();
    let mut index = vec![0; dims.len()];
    let mut values = Vec::with_capacity(dims.iter().product());
    loop {
        let sub: Vec<usize> = subset.iter().map(|&i| index[i]).collect();
        values.push(compact.values()[ravel(&sub, &compact_dims)]);
        if !next_index(&mut index, &dims) {
            break;
        }
    }
    ProductFunction::new(domain.to_vec(), values)
}

#[allow(clippy::needless_range_loop)]
fn average_axis_compact(
    values: &[f64],
    dims: &[usize],
    axis: usize,
    probs: &[f64],
) -> (Vec<f64>, Vec<usize>) {
    let outer: usize = dims[..axis].iter().product();
    let m = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * inner];
    for o in 0..outer {
        for a in 0..m {
            let base = (o * m + a) * inner;
            let w = probs[a];
            for j in 0..inner {
                out[o * inner + j] += w * values[base + j];
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims.remove(axis);
    (out, new_dims)
}

/// Computes the Efron-Stein decomposition of `f` by inclusion-exclusion
/// over conditional expectations; requires full support on every
/// coordinate space.
pub fn efron_stein(f: &ProductFunction) -> Result<EfronSteinDecomposition> {
    let n = f.n();
    if n > MAX_EFRON_STEIN_COORDS {
        return Err(Error::SizeCapExceeded(format!(
            "efron_stein supports up to {MAX_EFRON_STEIN_COORDS} coordinates, got {n}"
        )));
    }
    for space in f.domain() {
        if space.probs().iter().any(|&p| p <= 0.0) {
            return Err(Error::ZeroMassAtom(
                "efron_stein requires full support on every coordinate".into(),
            ));
        }
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let mask_dims = |mask: u32| -> Vec<usize> {
        (0..n).filter(|i| mask >> i & 1 == 1).map(|i| f.dims()[i]).collect()
    };
    // cond[mask] = E[f | X_mask], stored compactly over the axes in mask
    let mut cond: Vec<Option<Vec<f64>>> = vec![None; 1 << n];
    cond[full as usize] = Some(f.values().to_vec());
    for mask in (0..full).rev() {
        let missing = (!mask & full).trailing_zeros() as usize;
        let parent = mask | (1 << missing);
        let parent_axes: Vec<usize> = (0..n).filter(|i| parent >> i & 1 == 1).collect();
        let pos = parent_axes.iter().position(|&i| i == missing).unwrap();
        let parent_values = cond[parent as usize].as_ref().expect("computed above");
        let (vals, _) = average_axis_compact(
            parent_values,
            &mask_dims(parent),
            pos,
            f.domain()[missing].probs(),
        );
        cond[mask as usize] = Some(vals);
    }
    // f_S = Σ_{S' ⊆ S} (−1)^{|S \ S'|} E[f | X_{S'}]
    let mut components = Vec::with_capacity(1 << n);
    for mask in 0..=full {
        let axes: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let dims = mask_dims(mask);
        let len: usize = dims.iter().product();
        let mut acc = vec![0.0; len];
        let mut sub = mask;
        loop {
            let sign = if (mask ^ sub).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let table = cond[sub as usize].as_ref().expect("all masks computed");
            // broadcast sub-compact into mask-compact
            let sub_axes: Vec<usize> = (0..n).filter(|i| sub >> i & 1 == 1).collect();
            let sub_dims: Vec<usize> = sub_axes.iter().map(|&i| f.dims()[i]).collect();
            let positions: Vec<usize> = sub_axes
                .iter()
                .map(|&i| axes.iter().position(|&a| a == i).unwrap())
                .collect();
            let mut index = vec![0; axes.len()];
            let mut flat = 0;
            loop {
                let sub_index: Vec<usize> = positions.iter().map(|&p| index[p]).collect();
                acc[flat] += sign * table[ravel(&sub_index, &sub_dims)];
                if !next_index(&mut index, &dims) {
                    break;
                }
                flat += 1;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
        let spaces: Vec<FiniteSpace> = axes.iter().map(|&i| f.domain()[i].clone()).collect();
        components.push(EfronSteinComponent {
            subset: axes,
            function: ProductFunction::new(spaces, acc)?,
        });
    }
    Ok(EfronSteinDecomposition {
        domain: f.domain().to_vec(),
        components,
    })
}

/// A sparse multilinear polynomial over per-coordinate orthonormal bases.
///
/// A term index lists `(coordinate, basis index ≥ 1)` pairs sorted by
/// coordinate; the degree of a term is the number of pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearPoly {
    n: usize,
    basis_dims: Vec<usize>,
    terms: Vec<(Vec<(usize, usize)>, f64)>,
}

impl MultilinearPoly {
    pub fn new(
        n: usize,
        basis_dims: Vec<usize>,
        terms: Vec<(Vec<(usize, usize)>, f64)>,
    ) -> Result<Self> {
        if basis_dims.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} basis dimensions for {n} coordinates",
                basis_dims.len()
            )));
        }
        for (sigma, _) in &terms {
            for (pos, &(i, j)) in sigma.iter().enumerate() {
                if i >= n {
                    return Err(Error::IndexOutOfRange(format!("term coordinate {i} of {n}")));
                }
                if j == 0 || j >= basis_dims[i] {
                    return Err(Error::IndexOutOfRange(format!(
                        "basis index {j} on coordinate {i} (dimension {})",
                        basis_dims[i]
                    )));
                }
                if pos > 0 && sigma[pos - 1].0 >= i {
                    return Err(Error::InvalidFunction(
                        "term indices must be sorted by coordinate".into(),
                    ));
                }
            }
        }
        Ok(Self {
            n,
            basis_dims,
            terms,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis_dims(&self) -> &[usize] {
        &self.basis_dims
    }

    pub fn terms(&self) -> &[(Vec<(usize, usize)>, f64)] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(s, _)| s.len()).max().unwrap_or(0)
    }

    /// Coefficient of the empty term, i.e. the expectation.
    pub fn expectation(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(s, _)| s.is_empty())
            .map(|(_, c)| c)
            .sum()
    }

    /// `E[Q²] = Σ c²` by orthonormality.
    pub fn second_moment(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c * c).sum()
    }

    pub fn variance(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(s, _)| !s.is_empty())
            .map(|(_, c)| c * c)
            .sum()
    }

    /// `Σ_{σ : σ_i > 0} c_σ²`.
    pub fn influence(&self, i: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(s, _)| s.iter().any(|&(c, _)| c == i))
            .map(|(_, c)| c * c)
            .sum()
    }

    /// `Σ_{σ : |σ| ≤ d, σ_i > 0} c_σ²`.
    pub fn low_degree_influence(&self, i: usize, d: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(s, _)| s.len() <= d && s.iter().any(|&(c, _)| c == i))
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Noise operator: multiplies each degree-`|σ|` coefficient by
    /// `rho^|σ|`.
    pub fn noise_scaled(&self, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) || rho.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "noise parameter must lie in [0,1], got {rho}"
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|(s, c)| (s.clone(), c * rho.powi(s.len() as i32)))
            .collect();
        Self::new(self.n, self.basis_dims.clone(), terms)
    }

    /// Coordinates appearing in at least one term.
    pub fn active_coords(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        for (s, _) in &self.terms {
            for &(i, _) in s {
                seen[i] = true;
            }
        }
        (0..self.n).filter(|&i| seen[i]).collect()
    }

    /// Evaluates the polynomial given the value of each basis element.
    pub fn evaluate(&self, basis_value: impl Fn(usize, usize) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(s, c)| c * s.iter().map(|&(i, j)| basis_value(i, j)).product::<f64>())
            .sum()
    }
}

fn transform_axis(
    values: &[f64],
    dims: &[usize],
    axis: usize,
    matrix: &[Vec<f64>],
) -> (Vec<f64>, Vec<usize>) {
    let outer: usize = dims[..axis].iter().product();
    let m = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let rows = matrix.len();
    let mut out = vec![0.0; outer * rows * inner];
    for o in 0..outer {
        for (r, row) in matrix.iter().enumerate() {
            debug_assert_eq!(row.len(), m);
            let dst = (o * rows + r) * inner;
            for (a, &coef) in row.iter().enumerate() {
                if coef == 0.0 {
                    continue;
                }
                let src = (o * m + a) * inner;
                for j in 0..inner {
                    out[dst + j] += coef * values[src + j];
                }
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[axis] = rows;
    (out, new_dims)
}

/// Expands a table into a multilinear polynomial over the Gram-Schmidt
/// bases of its domain.
pub fn to_multilinear(f: &ProductFunction) -> Result<MultilinearPoly> {
    let n = f.n();
    let mut values = f.values().to_vec();
    let mut dims = f.dims().to_vec();
    for (axis, space) in f.domain().iter().enumerate() {
        let basis = orthonormal_basis(space)?;
        // row j: a ↦ φ_j(a) μ(a), so the transform projects onto φ_j
        let matrix: Vec<Vec<f64>> = (0..basis.dim())
            .map(|j| {
                (0..space.len())
                    .map(|a| basis.value(j, a) * space.prob(a))
                    .collect()
            })
            .collect();
        let (v, d) = transform_axis(&values, &dims, axis, &matrix);
        values = v;
        dims = d;
    }
    let mut terms = Vec::new();
    let mut index = vec![0; n];
    let mut flat = 0;
    loop {
        let c = values[flat];
        if c != 0.0 {
            let sigma: Vec<(usize, usize)> = index
                .iter()
                .enumerate()
                .filter(|&(_, &j)| j > 0)
                .map(|(i, &j)| (i, j))
                .collect();
            terms.push((sigma, c));
        }
        if n == 0 || !next_index(&mut index, &dims) {
            break;
        }
        flat += 1;
    }
    MultilinearPoly::new(n, f.dims().to_vec(), terms)
}

/// Evaluates a polynomial back into a table over the given domain.
pub fn from_multilinear(poly: &MultilinearPoly, domain: &[FiniteSpace]) -> Result<ProductFunction> {
    if domain.len() != poly.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} domain spaces for an {}-coordinate polynomial",
            domain.len(),
            poly.n()
        )));
    }
    for (i, space) in domain.iter().enumerate() {
        if space.len() != poly.basis_dims()[i] {
            return Err(Error::DimensionMismatch(format!(
                "coordinate {i}: space has {} atoms, polynomial basis has {}",
                space.len(),
                poly.basis_dims()[i]
            )));
        }
    }
    let dims: Vec<usize> = poly.basis_dims().to_vec();
    let len: usize = dims.iter().product();
    if len > MAX_TABLE_LEN {
        return Err(Error::SizeCapExceeded(format!(
            "table would have {len} entries (cap {MAX_TABLE_LEN})"
        )));
    }
    // dense coefficient tensor, then per-axis basis evaluation
    let mut coeffs = vec![0.0; len];
    for (sigma, c) in poly.terms() {
        let mut index = vec![0; poly.n()];
        for &(i, j) in sigma {
            index[i] = j;
        }
        coeffs[ravel(&index, &dims)] += c;
    }
    let mut values = coeffs;
    let mut cur_dims = dims;
    for (axis, space) in domain.iter().enumerate() {
        let basis = orthonormal_basis(space)?;
        // row a: j ↦ φ_j(a), evaluating the expansion at atom a
        let matrix: Vec<Vec<f64>> = (0..space.len())
            .map(|a| (0..basis.dim()).map(|j| basis.value(j, a)).collect())
            .collect();
        let (v, d) = transform_axis(&values, &cur_dims, axis, &matrix);
        values = v;
        cur_dims = d;
    }
    ProductFunction::new(domain.to_vec(), values)
}

/// Low-degree influence of a table function.
pub fn low_degree_influence(f: &ProductFunction, i: usize, d: usize) -> Result<f64> {
    if i >= f.n() {
        return Err(Error::IndexOutOfRange(format!(
            "coordinate {i} of {}",
            f.n()
        )));
    }
    Ok(to_multilinear(f)?.low_degree_influence(i, d))
}

/// Applies the tensorized Markov operator of a sequence of two-component
/// joints: `f` lives on the product of the second components, the result
/// `Tf(x) = E[f(Y) | X = x]` on the product of the first.
pub fn apply_markov(joints: &[JointDistribution], f: &ProductFunction) -> Result<ProductFunction> {
    if joints.len() != f.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} joints for an {}-coordinate function",
            joints.len(),
            f.n()
        )));
    }
    let mut values = f.values().to_vec();
    let mut dims = f.dims().to_vec();
    let mut new_domain = Vec::with_capacity(f.n());
    for (axis, joint) in joints.iter().enumerate() {
        if joint.arity() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "joint {axis} has arity {}, expected 2",
                joint.arity()
            )));
        }
        let from = joint.component(1);
        let side = &f.domain()[axis];
        if from.len() != side.len()
            || from
                .probs()
                .iter()
                .zip(side.probs())
                .any(|(a, b)| (a - b).abs() > 1e-9)
        {
            return Err(Error::DimensionMismatch(format!(
                "coordinate {axis}: function marginal does not match the \
                 joint's second component"
            )));
        }
        let m = joint.markov_matrix(1, 0)?;
        let matrix: Vec<Vec<f64>> = (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
            .collect();
        let (v, d) = transform_axis(&values, &dims, axis, &matrix);
        values = v;
        dims = d;
        new_domain.push(joint.component(0).clone());
    }
    ProductFunction::new(new_domain, values)
}

/// The noise operator on a table: expands into the orthonormal basis,
/// scales degree-`d` terms by `rho^d`, and evaluates back.
pub fn bonami_beckner(f: &ProductFunction, rho: f64) -> Result<ProductFunction> {
    let poly = to_multilinear(f)?.noise_scaled(rho)?;
    from_multilinear(&poly, f.domain())
}

/// Functionals whose invariance across ensembles is measured empirically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    /// Squared distance from the unit interval, summed over coordinates.
    Zeta,
    /// Product of values clamped to the unit interval.
    Chi,
}

impl Functional {
    fn apply(self, xs: &[f64]) -> f64 {
        match self {
            Functional::Zeta => xs
                .iter()
                .map(|&x| {
                    let d = x - x.clamp(0.0, 1.0);
                    d * d
                })
                .sum(),
            Functional::Chi => xs.iter().map(|&x| x.clamp(0.0, 1.0)).product(),
        }
    }
}

/// Monte Carlo comparison of a functional of a polynomial vector under
/// the discrete ensemble and the Gaussian ensemble of matching covariance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InvarianceGap {
    pub discrete: McEstimate,
    pub gaussian: McEstimate,
    /// `|Ê_discrete − Ê_gaussian|`.
    pub gap: f64,
    pub functional: Functional,
    /// Worst-case discrepancy certificate `2·d·k³·(8/√α)^d·√τ` for C³
    /// test functions of unit third-derivative bound, with `d` the
    /// degree, `τ` the largest vector influence and `α` the least atom
    /// probability. A reference scale only; it is typically far above
    /// the measured gap and is never asserted.
    pub c3_reference_bound: f64,
}

/// Estimates `E[ψ(Q(X))] − E[ψ(Q(G))]` for a vector of polynomials
/// sharing one domain: `X` is the discrete product ensemble, `G` the
/// independent Gaussian ensemble standing in for each basis element.
pub fn invariance_gap(
    polys: &[MultilinearPoly],
    domain: &[FiniteSpace],
    functional: Functional,
    samples: u64,
    seed: u64,
) -> Result<InvarianceGap> {
    let Some(first) = polys.first() else {
        return Err(Error::EmptySubset("invariance_gap of no polynomials".into()));
    };
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "invariance_gap requires at least 1000 samples, got {samples}"
        )));
    }
    for p in polys {
        if p.n() != first.n() || p.basis_dims() != first.basis_dims() {
            return Err(Error::DimensionMismatch(
                "polynomials must share coordinates and basis dimensions".into(),
            ));
        }
    }
    if domain.len() != first.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} domain spaces for {} coordinates",
            domain.len(),
            first.n()
        )));
    }
    for (i, space) in domain.iter().enumerate() {
        if space.len() != first.basis_dims()[i] {
            return Err(Error::DimensionMismatch(format!(
                "coordinate {i}: space/basis dimension mismatch"
            )));
        }
    }
    let mut active = vec![false; first.n()];
    let mut max_basis = vec![0usize; first.n()];
    for p in polys {
        for (sigma, _) in p.terms() {
            for &(i, j) in sigma {
                active[i] = true;
                max_basis[i] = max_basis[i].max(j);
            }
        }
    }
    let active: Vec<usize> = (0..first.n()).filter(|&i| active[i]).collect();
    let slot_of: std::collections::HashMap<usize, usize> =
        active.iter().enumerate().map(|(s, &i)| (i, s)).collect();

    let bases: Vec<OrthonormalBasis> = active
        .iter()
        .map(|&i| orthonormal_basis(&domain[i]))
        .collect::<Result<Vec<_>>>()?;
    let cumulative: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| {
            let mut acc = 0.0;
            domain[i]
                .probs()
                .iter()
                .map(|&p| {
                    acc += p;
                    acc
                })
                .collect()
        })
        .collect();

    let discrete = sample_mean(seed, 101, samples, |rng| {
        let atoms: Vec<usize> = cumulative
            .iter()
            .map(|cum| {
                let u: f64 = rng.random();
                cum.iter().position(|&c| u <= c).unwrap_or(cum.len() - 1)
            })
            .collect();
        let xs: Vec<f64> = polys
            .iter()
            .map(|p| p.evaluate(|i, j| bases[slot_of[&i]].value(j, atoms[slot_of[&i]])))
            .collect();
        functional.apply(&xs)
    });

    let degree = polys.iter().map(MultilinearPoly::degree).max().unwrap_or(0);
    let max_influence = (0..first.n())
        .map(|i| polys.iter().map(|p| p.influence(i)).sum::<f64>())
        .fold(0.0f64, f64::max);
    let min_atom = domain
        .iter()
        .flat_map(|s| s.probs().iter().copied())
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    let c3_reference_bound = 2.0
        * degree as f64
        * (polys.len() as f64).powi(3)
        * (8.0 / min_atom.sqrt()).powi(degree as i32)
        * max_influence.sqrt();

    let gaussian = sample_mean(seed, 102, samples, |rng| {
        let draws: Vec<Vec<f64>> = active
            .iter()
            .map(|&i| (0..max_basis[i]).map(|_| sample_standard_normal(rng)).collect())
            .collect();
        let xs: Vec<f64> = polys
            .iter()
            .map(|p| p.evaluate(|i, j| draws[slot_of[&i]][j - 1]))
            .collect();
        functional.apply(&xs)
    });

    Ok(InvarianceGap {
        gap: (discrete.mean - gaussian.mean).abs(),
        discrete,
        gaussian,
        functional,
        c3_reference_bound,
    })
}
