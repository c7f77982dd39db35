//! Product-expectation bound checking and the recursive influence
//! regularizer.
//!
//! `check_product_bound` evaluates `E[∏ f_j]` for `[0,1]`-valued
//! functions on the sides of a sequence of correlated coordinate spaces,
//! measures the correlation vector, and compares against the Gaussian
//! stability envelope. Product expectations are exact by enumeration when
//! the coordinate product stays below `10^6` cells and seeded Monte Carlo
//! with a `3·stderr` guard band otherwise.

use crate::error::{Error, Result};
use crate::functions::ProductFunction;
use crate::gaussian::{stability_lower_k, stability_upper_k, StabilityQuery};
use crate::mc::sample_mean;
use crate::spaces::{next_index, FiniteSpace, JointDistribution};
use rand::Rng;
use serde::Serialize;

/// Enumeration threshold for exact product expectations.
const MAX_ENUMERATION_CELLS: u128 = 1_000_000;
/// Unit-range check tolerance.
const UNIT_RANGE_TOL: f64 = 1e-9;

/// Derived parameters of the bound theorems for a requested accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub rho: f64,
    pub c_tau: f64,
    pub c_gamma: f64,
    /// Influence threshold `ε^(C·log(1/α)·log(1/ε) / (ε(1−ρ)))`; a
    /// worst-case certificate, astronomically small by design.
    pub tau: f64,
    /// Smoothing rate `C·(1−ρ)·ε / log(1/ε)`.
    pub gamma: f64,
    /// `K = log(1/α)`.
    pub k_factor: f64,
}

/// Evaluates the parameter formulas; all logarithms are natural.
pub fn compute_params(
    epsilon: f64,
    alpha: f64,
    rho: f64,
    c_tau: f64,
    c_gamma: f64,
) -> Result<BoundParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1/2], got {alpha}"
        )));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(
            "requires rho < 1 (and rho >= 0)".into(),
        ));
    }
    if c_tau <= 0.0 || c_gamma <= 0.0 {
        return Err(Error::InvalidParameter("constants must be positive".into()));
    }
    let log_inv_eps = (1.0 / epsilon).ln();
    let k_factor = (1.0 / alpha).ln();
    let exponent = c_tau * k_factor * log_inv_eps / (epsilon * (1.0 - rho));
    let tau = epsilon.powf(exponent);
    let gamma = c_gamma * (1.0 - rho) * epsilon / log_inv_eps;
    Ok(BoundParams {
        epsilon,
        alpha,
        rho,
        c_tau,
        c_gamma,
        tau,
        gamma,
        k_factor,
    })
}

/// Hypercontractivity constant `η_q(α)` for mean-zero variables on a
/// space whose least atom probability is `α ≤ 1/2`:
/// `((A^{1/q'} − A^{−1/q'}) / (A^{1/q} − A^{−1/q}))^{−1/2}` with
/// `A = (1−α)/α`. At `α = 1/2` the `A → 1` limit `sqrt(q'/q)` applies.
pub fn hyper_eta(q: f64, alpha: f64) -> Result<f64> {
    if q <= 1.0 {
        return Err(Error::InvalidParameter(format!("q must exceed 1, got {q}")));
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1/2], got {alpha}"
        )));
    }
    let qp = q / (q - 1.0);
    if alpha == 0.5 {
        return Ok((qp / q).sqrt());
    }
    let a = (1.0 - alpha) / alpha;
    let ratio = (a.powf(1.0 / qp) - a.powf(-1.0 / qp)) / (a.powf(1.0 / q) - a.powf(-1.0 / q));
    Ok(ratio.powf(-0.5))
}

/// Pointwise supremum of `f` over the coordinates in `s`.
pub fn sup_over(f: &ProductFunction, s: &[usize]) -> Result<ProductFunction> {
    f.sup_over(s)
}

/// Pointwise infimum of `f` over the coordinates in `s`.
pub fn inf_over(f: &ProductFunction, s: &[usize]) -> Result<ProductFunction> {
    f.inf_over(s)
}

/// Conditional expectation of `f` over the coordinates in `s`.
pub fn average_over(f: &ProductFunction, s: &[usize]) -> Result<ProductFunction> {
    f.average_over(s)
}

/// A `[0,1]`-valued function fed to the bound checker: either an exact
/// table or a structured threshold indicator usable at large `n`.
#[derive(Debug, Clone)]
pub enum BoundFunction {
    Table(ProductFunction),
    /// `f(x) = 1` when `bias + Σ_i scores[i][x_i] > 0`, else `0`.
    Threshold { scores: Vec<Vec<i64>>, bias: i64 },
}

impl BoundFunction {
    fn n(&self) -> usize {
        match self {
            BoundFunction::Table(f) => f.n(),
            BoundFunction::Threshold { scores, .. } => scores.len(),
        }
    }

    fn validate(&self, sides: &[FiniteSpace]) -> Result<()> {
        match self {
            BoundFunction::Table(f) => {
                if !f.is_unit_range(UNIT_RANGE_TOL) {
                    return Err(Error::InvalidFunction(
                        "bound functions must take values in [0,1]".into(),
                    ));
                }
                if f.n() != sides.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "table has {} coordinates, joints have {}",
                        f.n(),
                        sides.len()
                    )));
                }
                for (i, (space, side)) in f.domain().iter().zip(sides).enumerate() {
                    if space.len() != side.len()
                        || space
                            .probs()
                            .iter()
                            .zip(side.probs())
                            .any(|(a, b)| (a - b).abs() > 1e-9)
                    {
                        return Err(Error::DimensionMismatch(format!(
                            "coordinate {i}: table marginal does not match the joint side"
                        )));
                    }
                }
            }
            BoundFunction::Threshold { scores, .. } => {
                if scores.len() != sides.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "threshold has {} coordinates, joints have {}",
                        scores.len(),
                        sides.len()
                    )));
                }
                for (i, (row, side)) in scores.iter().zip(sides).enumerate() {
                    if row.len() != side.len() {
                        return Err(Error::DimensionMismatch(format!(
                            "coordinate {i}: {} scores for {} atoms",
                            row.len(),
                            side.len()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn eval(&self, atoms: &[usize]) -> f64 {
        match self {
            BoundFunction::Table(f) => f.value(atoms),
            BoundFunction::Threshold { scores, bias } => {
                let sum: i64 = scores.iter().zip(atoms).map(|(row, &a)| row[a]).sum();
                f64::from(bias + sum > 0)
            }
        }
    }

    /// Distribution of the score sum under the product of `sides`,
    /// indexed from the minimum possible sum.
    fn sum_distribution(scores: &[Vec<i64>], sides: &[FiniteSpace], skip: Option<usize>) -> (i64, Vec<f64>) {
        let min: i64 = scores
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, row)| row.iter().copied().min().unwrap_or(0))
            .sum();
        let max: i64 = scores
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, row)| row.iter().copied().max().unwrap_or(0))
            .sum();
        let span = (max - min + 1) as usize;
        let mut dist = vec![0.0; span];
        dist[0] = 1.0;
        let mut width = 1usize;
        for (i, (row, side)) in scores.iter().zip(sides).enumerate() {
            if Some(i) == skip {
                continue;
            }
            let row_min = row.iter().copied().min().unwrap_or(0);
            let mut next = vec![0.0; span];
            for (offset, &p) in dist.iter().enumerate().take(width) {
                if p == 0.0 {
                    continue;
                }
                for (atom, &w) in row.iter().enumerate() {
                    let shift = (w - row_min) as usize;
                    next[offset + shift] += p * side.prob(atom);
                }
            }
            dist = next;
            width += (row.iter().copied().max().unwrap_or(0) - row_min) as usize;
        }
        (min, dist)
    }

    /// Exact mean under the product of the sides.
    fn mean(&self, sides: &[FiniteSpace]) -> Result<f64> {
        match self {
            BoundFunction::Table(f) => Ok(f.expectation()),
            BoundFunction::Threshold { scores, bias } => {
                let (min, dist) = Self::sum_distribution(scores, sides, None);
                Ok(dist
                    .iter()
                    .enumerate()
                    .filter(|(off, _)| bias + min + *off as i64 > 0)
                    .map(|(_, p)| p)
                    .sum())
            }
        }
    }

    /// Exact influences under the product of the sides.
    fn influences(&self, sides: &[FiniteSpace]) -> Result<Vec<f64>> {
        match self {
            BoundFunction::Table(f) => f.all_influences(),
            BoundFunction::Threshold { scores, bias } => {
                let n = scores.len();
                let identical = n > 0
                    && scores.iter().all(|row| row == &scores[0])
                    && sides.iter().all(|s| s.probs() == sides[0].probs());
                if !identical && n > 64 {
                    return Err(Error::SizeCapExceeded(
                        "exact influences of non-identical thresholds are \
                         limited to 64 coordinates"
                            .into(),
                    ));
                }
                let influence_at = |i: usize| -> f64 {
                    let (min, dist) = Self::sum_distribution(scores, sides, Some(i));
                    let mut total = 0.0;
                    for (off, &p_rest) in dist.iter().enumerate() {
                        if p_rest == 0.0 {
                            continue;
                        }
                        let base = min + off as i64;
                        let p_pos: f64 = scores[i]
                            .iter()
                            .zip(sides[i].probs())
                            .filter(|(&w, _)| bias + base + w > 0)
                            .map(|(_, &pr)| pr)
                            .sum();
                        total += p_rest * p_pos * (1.0 - p_pos);
                    }
                    total
                };
                if identical {
                    let v = influence_at(0);
                    Ok(vec![v; n])
                } else {
                    Ok((0..n).map(influence_at).collect())
                }
            }
        }
    }
}

/// How the product expectation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMeanMethod {
    Enumeration,
    MonteCarlo,
}

/// The product expectation with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductMean {
    pub value: f64,
    /// Zero for enumeration.
    pub stderr: f64,
    pub method: ProductMeanMethod,
    /// Trial count and seed when the value is a Monte Carlo estimate.
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

/// Options for [`check_product_bound`].
#[derive(Debug, Clone, Copy)]
pub struct BoundCheckOptions {
    pub epsilon: f64,
    pub mc_samples: u64,
    pub seed: u64,
    /// Degree for the reported low-degree influences of table functions.
    pub low_degree_d: usize,
}

impl Default for BoundCheckOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            mc_samples: 20_000,
            seed: 0,
            low_degree_d: 2,
        }
    }
}

/// Everything the bound checker measured, with its verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub means: Vec<f64>,
    pub product_mean: ProductMean,
    /// `Π_j E[f_j]`.
    pub independent_product: f64,
    /// `influences[j][i]` is `Inf_i(f_j)`.
    pub influences: Vec<Vec<f64>>,
    pub max_influence: f64,
    /// Low-degree influences for table functions (`None` entries for
    /// structured functions) at degree `low_degree_d`.
    pub low_degree_influences: Vec<Option<Vec<f64>>>,
    pub low_degree_d: usize,
    /// Prefix-vs-suffix correlations, maximized over coordinates.
    pub rho_vector: Vec<f64>,
    pub overall_rho: f64,
    /// Least positive atom probability across coordinate joints.
    pub alpha: f64,
    pub stability_upper: f64,
    pub stability_lower: f64,
    pub epsilon: f64,
    /// True when every coordinate joint is pairwise independent.
    pub pairwise_independent: bool,
    /// `Γ̲ − ε ≤ E[∏f] ≤ Γ̄ + ε`, with a `3·stderr` guard for Monte Carlo
    /// estimates.
    pub verdict_stability: bool,
    /// `|E[∏f] − Π E[f_j]| ≤ ε`; only evaluated under pairwise
    /// independence.
    pub verdict_independent: Option<bool>,
    /// `Γ̄ + ε − E[∏f]` (negative means the upper bound failed).
    pub slack_upper: f64,
    /// `E[∏f] − (Γ̲ − ε)`.
    pub slack_lower: f64,
}

/// Checks the stability envelope for `[0,1]`-valued functions on the
/// sides of `n` coordinate joints of arity `k`.
pub fn check_product_bound(
    joints: &[JointDistribution],
    functions: &[BoundFunction],
    options: BoundCheckOptions,
) -> Result<BoundReport> {
    let Some(first) = joints.first() else {
        return Err(Error::EmptySubset("no coordinate joints".into()));
    };
    let k = first.arity();
    if functions.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} functions for arity-{k} joints",
            functions.len()
        )));
    }
    for j in joints {
        if j.arity() != k {
            return Err(Error::DimensionMismatch(
                "all coordinate joints must share one arity".into(),
            ));
        }
    }
    if options.epsilon <= 0.0 || options.epsilon.is_nan() {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let n = joints.len();
    // side marginals per function
    let sides: Vec<Vec<FiniteSpace>> = (0..k)
        .map(|j| joints.iter().map(|joint| joint.component(j).clone()).collect())
        .collect();
    for (j, f) in functions.iter().enumerate() {
        if f.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "function {j} has {} coordinates, joints have {n}",
                f.n()
            )));
        }
        f.validate(&sides[j])?;
    }

    let means: Vec<f64> = functions
        .iter()
        .enumerate()
        .map(|(j, f)| f.mean(&sides[j]))
        .collect::<Result<Vec<_>>>()?;
    let independent_product: f64 = means.iter().product();

    let influences: Vec<Vec<f64>> = functions
        .iter()
        .enumerate()
        .map(|(j, f)| f.influences(&sides[j]))
        .collect::<Result<Vec<_>>>()?;
    let max_influence = influences
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max);
    let low_degree_influences: Vec<Option<Vec<f64>>> = functions
        .iter()
        .map(|f| match f {
            BoundFunction::Table(t) => {
                let poly = crate::functions::to_multilinear(t).ok()?;
                Some(
                    (0..t.n())
                        .map(|i| poly.low_degree_influence(i, options.low_degree_d))
                        .collect(),
                )
            }
            BoundFunction::Threshold { .. } => None,
        })
        .collect();

    // correlation vector: per prefix, max over coordinates
    let mut rho_vector = vec![0.0f64; k - 1];
    let mut overall_rho = 0.0f64;
    let mut alpha = f64::INFINITY;
    let mut pairwise_independent = true;
    for joint in joints {
        let report = joint.correlation_report()?;
        for (slot, v) in rho_vector.iter_mut().zip(&report.vector_rho) {
            *slot = slot.max(*v);
        }
        overall_rho = overall_rho.max(report.overall_rho);
        alpha = alpha.min(joint.alpha());
        if pairwise_independent {
            pairwise_independent = joint.r_wise_independence(2.min(k))?.holds;
        }
    }

    let query = StabilityQuery::new(rho_vector.clone(), means.clone())?;
    let stability_upper = stability_upper_k(&query)?;
    let stability_lower = stability_lower_k(&query)?;

    // product expectation: exact enumeration when the coordinate product
    // is small, Monte Carlo otherwise
    let cells: u128 = joints
        .iter()
        .try_fold(1u128, |acc, j| {
            acc.checked_mul(j.tensor().len() as u128)
                .filter(|&c| c <= MAX_ENUMERATION_CELLS)
        })
        .unwrap_or(MAX_ENUMERATION_CELLS + 1);
    let product_mean = if cells <= MAX_ENUMERATION_CELLS {
        let mut value = 0.0;
        let dims: Vec<usize> = joints.iter().map(|j| j.tensor().len()).collect();
        let mut index = vec![0usize; n];
        loop {
            let mut p = 1.0;
            for (i, joint) in joints.iter().enumerate() {
                p *= joint.tensor()[index[i]];
            }
            if p > 0.0 {
                // per-component atoms of each coordinate's joint cell
                let atoms_by_coord: Vec<Vec<usize>> = (0..n)
                    .map(|i| crate::spaces::unravel(index[i], joints[i].dims()))
                    .collect();
                let mut prod = 1.0;
                for (j, f) in functions.iter().enumerate() {
                    let atoms: Vec<usize> = (0..n).map(|i| atoms_by_coord[i][j]).collect();
                    prod *= f.eval(&atoms);
                    if prod == 0.0 {
                        break;
                    }
                }
                value += p * prod;
            }
            if !next_index(&mut index, &dims) {
                break;
            }
        }
        ProductMean {
            value,
            stderr: 0.0,
            method: ProductMeanMethod::Enumeration,
            samples: None,
            seed: None,
        }
    } else {
        if options.mc_samples == 0 {
            return Err(Error::InvalidParameter(
                "mc_samples must be positive for Monte Carlo evaluation".into(),
            ));
        }
        // cumulative atom-tuple distributions per coordinate
        let cumulative: Vec<Vec<f64>> = joints
            .iter()
            .map(|j| {
                let mut acc = 0.0;
                j.tensor()
                    .iter()
                    .map(|&p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        let dims_per_coord: Vec<Vec<usize>> =
            joints.iter().map(|j| j.dims().to_vec()).collect();
        let est = sample_mean(options.seed, 301, options.mc_samples, |rng| {
            let mut atoms = vec![vec![0usize; n]; k];
            for i in 0..n {
                let u: f64 = rng.random();
                let cell = cumulative[i]
                    .iter()
                    .position(|&c| u <= c)
                    .unwrap_or(cumulative[i].len() - 1);
                let idx = crate::spaces::unravel(cell, &dims_per_coord[i]);
                for (j, &a) in idx.iter().enumerate() {
                    atoms[j][i] = a;
                }
            }
            functions
                .iter()
                .enumerate()
                .map(|(j, f)| f.eval(&atoms[j]))
                .product()
        });
        ProductMean {
            value: est.mean,
            stderr: est.stderr,
            method: ProductMeanMethod::MonteCarlo,
            samples: Some(est.trials),
            seed: Some(est.seed),
        }
    };

    let guard = 3.0 * product_mean.stderr;
    let upper_ok = product_mean.value - guard <= stability_upper + options.epsilon;
    let lower_ok = product_mean.value + guard >= stability_lower - options.epsilon;
    let verdict_stability = upper_ok && lower_ok;
    let verdict_independent = pairwise_independent.then(|| {
        (product_mean.value - independent_product).abs() <= options.epsilon + guard
    });

    Ok(BoundReport {
        means,
        product_mean,
        independent_product,
        influences,
        max_influence,
        low_degree_influences,
        low_degree_d: options.low_degree_d,
        rho_vector,
        overall_rho,
        alpha,
        stability_upper,
        stability_lower,
        epsilon: options.epsilon,
        pairwise_independent,
        verdict_stability,
        verdict_independent,
        slack_upper: stability_upper + options.epsilon - product_mean.value,
        slack_lower: product_mean.value - (stability_lower - options.epsilon),
    })
}

/// Direction of one regularization step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepDirection {
    Sup,
    Inf,
}

/// One step of the recursive regularizer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegularizationStep {
    pub coordinate: usize,
    pub function: usize,
    pub direction: StepDirection,
    pub mean_before: f64,
    pub mean_after: f64,
}

/// Final state of the regularizer: the touched coordinate set and both
/// modified families.
#[derive(Debug, Clone)]
pub struct RegularizationResult {
    /// Coordinates in insertion order.
    pub coordinates: Vec<usize>,
    pub sup_functions: Vec<ProductFunction>,
    pub inf_functions: Vec<ProductFunction>,
    pub steps: Vec<RegularizationStep>,
}

/// Recursively absorbs influential coordinates: while any `f̄_j` or
/// `f̲_j` has a coordinate influence at least `tau`, the lowest such
/// coordinate (ties: lowest function, sup before inf) joins `S` and both
/// families are re-derived by `sup`/`inf` over `S`. Each triggering step
/// moves that function's mean by at least `alpha·tau`, so at most
/// `2k/(alpha·tau)` steps can occur.
pub fn regularize(
    functions: &[ProductFunction],
    tau: f64,
    alpha: f64,
) -> Result<RegularizationResult> {
    if functions.is_empty() {
        return Err(Error::EmptySubset("regularize of no functions".into()));
    }
    if !(tau > 0.0 && tau < 1.0) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(
            "tau and alpha must lie in (0,1)".into(),
        ));
    }
    let n = functions[0].n();
    for f in functions {
        if f.n() != n {
            return Err(Error::DimensionMismatch(
                "all functions must share one coordinate count".into(),
            ));
        }
        if !f.is_unit_range(UNIT_RANGE_TOL) {
            return Err(Error::InvalidFunction(
                "regularize requires [0,1]-valued functions".into(),
            ));
        }
    }
    let k = functions.len();
    let step_cap = (2.0 * k as f64 / (alpha * tau)).floor() as usize + 1;
    let mut sup_functions: Vec<ProductFunction> = functions.to_vec();
    let mut inf_functions: Vec<ProductFunction> = functions.to_vec();
    let mut coordinates: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    loop {
        let mut trigger: Option<(usize, usize, StepDirection)> = None;
        'scan: for i in 0..n {
            if coordinates.contains(&i) {
                continue;
            }
            for j in 0..k {
                if sup_functions[j].influence(i)? >= tau {
                    trigger = Some((i, j, StepDirection::Sup));
                    break 'scan;
                }
                if inf_functions[j].influence(i)? >= tau {
                    trigger = Some((i, j, StepDirection::Inf));
                    break 'scan;
                }
            }
        }
        let Some((i, j, direction)) = trigger else {
            break;
        };
        assert!(
            steps.len() < step_cap,
            "regularize exceeded its step cap of {step_cap}; this is a bug"
        );
        let mean_before = match direction {
            StepDirection::Sup => sup_functions[j].expectation(),
            StepDirection::Inf => inf_functions[j].expectation(),
        };
        coordinates.push(i);
        for f in sup_functions.iter_mut() {
            *f = f.sup_over(&[i])?;
        }
        for f in inf_functions.iter_mut() {
            *f = f.inf_over(&[i])?;
        }
        let mean_after = match direction {
            StepDirection::Sup => sup_functions[j].expectation(),
            StepDirection::Inf => inf_functions[j].expectation(),
        };
        steps.push(RegularizationStep {
            coordinate: i,
            function: j,
            direction,
            mean_before,
            mean_after,
        });
    }
    Ok(RegularizationResult {
        coordinates,
        sup_functions,
        inf_functions,
        steps,
    })
}

/// Raw-versus-smoothed product expectation of a two-sided pair under a
/// sequence of coordinate joints.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmoothComparison {
    /// `E[f(X) g(Y)]`.
    pub raw: f64,
    /// `E[(T_{1−γ} f)(X) (T_{1−γ} g)(Y)]`.
    pub smoothed: f64,
    pub difference: f64,
    /// `max_s min(ρ^s, 1 − (1−γ)^s)` from the measured correlation.
    pub epsilon_implied: f64,
    /// `2 · ε_implied · sqrt(Var f · Var g)`.
    pub bound: f64,
}

/// Compares the raw product expectation with the one where both sides
/// pass through the noise operator `T_{1−gamma}`.
pub fn smooth_compare(
    joints: &[JointDistribution],
    f: &ProductFunction,
    g: &ProductFunction,
    gamma: f64,
) -> Result<SmoothComparison> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in [0,1), got {gamma}"
        )));
    }
    let n = joints.len();
    if f.n() != n || g.n() != n {
        return Err(Error::DimensionMismatch(
            "functions must match the joint sequence length".into(),
        ));
    }
    if joints.iter().any(|j| j.arity() != 2) {
        return Err(Error::DimensionMismatch(
            "smooth_compare requires two-component coordinate joints".into(),
        ));
    }
    let cells: u128 = joints.iter().map(|j| j.tensor().len() as u128).product();
    if cells > MAX_ENUMERATION_CELLS {
        return Err(Error::SizeCapExceeded(format!(
            "smooth_compare enumerates the joint product ({cells} cells)"
        )));
    }
    let pair_expectation = |a: &ProductFunction, b: &ProductFunction| -> Result<f64> {
        let dims: Vec<usize> = joints.iter().map(|j| j.tensor().len()).collect();
        let mut index = vec![0usize; n];
        let mut total = 0.0;
        loop {
            let mut p = 1.0;
            let mut xi = Vec::with_capacity(n);
            let mut yi = Vec::with_capacity(n);
            for (i, joint) in joints.iter().enumerate() {
                p *= joint.tensor()[index[i]];
                let d1 = joint.dims()[1];
                xi.push(index[i] / d1);
                yi.push(index[i] % d1);
            }
            if p > 0.0 {
                total += p * a.value(&xi) * b.value(&yi);
            }
            if !next_index(&mut index, &dims) {
                break;
            }
        }
        Ok(total)
    };
    let raw = pair_expectation(f, g)?;
    let tf = crate::functions::bonami_beckner(f, 1.0 - gamma)?;
    let tg = crate::functions::bonami_beckner(g, 1.0 - gamma)?;
    let smoothed = pair_expectation(&tf, &tg)?;
    let rho = joints
        .iter()
        .map(|j| j.maximal_correlation(&[0]))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let epsilon_implied = (1..=n)
        .map(|s| {
            let s = s as i32;
            rho.powi(s).min(1.0 - (1.0 - gamma).powi(s))
        })
        .fold(0.0f64, f64::max);
    let bound = 2.0 * epsilon_implied * (f.variance() * g.variance()).sqrt();
    Ok(SmoothComparison {
        raw,
        smoothed,
        difference: (raw - smoothed).abs(),
        epsilon_implied,
        bound,
    })
}
