//! Scalar Gaussian numerics: CDF/quantile, bivariate quantile-box
//! probabilities, the recursive stability functionals and their
//! asymptotic sequences.
//!
//! The bivariate routine integrates the conditional-CDF integrand
//! `φ(t)·Φ((b−ρt)/√(1−ρ²))` with adaptive Simpson quadrature; correlations
//! within `1e-9` of `±1` are routed to the exact comonotone and
//! antimonotone limits where the quadrature would degenerate.

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `ln Φ(x)`, stable for arbitrarily negative `x`.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x > -1.0 {
        // upper tail is small; ln(1 - Q) with Q = Φ(-x)
        (-0.5 * libm::erfc(x / SQRT_2)).ln_1p()
    } else if x > -37.0 {
        (0.5 * libm::erfc(-x / SQRT_2)).ln()
    } else {
        // asymptotic expansion of the Mills ratio
        let z = -x;
        let z2 = z * z;
        -0.5 * z2 - (z * (2.0 * std::f64::consts::PI).sqrt()).ln()
            + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    }
}

/// Rational initial guess for the normal quantile (Wichura's PPND16),
/// polished below with Newton steps against [`normal_cdf`].
fn quantile_guess(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        let num = q
            * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
                + 6.726_577_092_700_87e4)
                * r
                + 4.592_195_393_154_987e4)
                * r
                + 1.373_169_376_550_946e4)
                * r
                + 1.971_590_950_306_551_3e3)
                * r
                + 1.331_416_678_917_843_8e2)
                * r
                + 3.387_132_872_796_366_5);
        let den = ((((((5.226_495_278_852_546e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
///
/// Round-trips satisfy `|Φ(Φ⁻¹(p)) − p| ≤ 1e−12` across
/// `p ∈ [1e−10, 1 − 1e−10]`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "normal_quantile requires p in (0,1), got {p}"
        )));
    }
    let mut x = quantile_guess(p);
    // Two damped Newton corrections; the second is a no-op at convergence.
    for _ in 0..2 {
        let err = normal_cdf(x) - p;
        let pdf = normal_pdf(x);
        if pdf > 0.0 {
            let d = err / pdf;
            x -= d / (1.0 + 0.5 * x * d);
        }
    }
    Ok(x)
}

/// Adaptive Simpson quadrature with an absolute error target.
#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
}

/// Adaptive Simpson over a fixed initial panel grid; the panels keep
/// narrow integrand peaks from slipping through the first probe.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let g: &dyn Fn(f64) -> f64 = &f;
    let panels = 96;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    let panel_eps = eps / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let hi = if p + 1 == panels { b } else { lo + h };
        let m = 0.5 * (lo + hi);
        let (fa, fm, fb) = (g(lo), g(m), g(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_rec(g, lo, hi, fa, fm, fb, whole, panel_eps, 44);
    }
    total
}

/// `Pr[X ≤ a, Y ≤ b]` for a standard bivariate normal pair with
/// correlation `rho`. Absolute accuracy is around `1e-12`.
pub fn binormal_lower(rho: f64, a: f64, b: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) || rho.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "binormal_lower requires rho in [-1,1], got {rho}"
        )));
    }
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidParameter(
            "binormal_lower thresholds must be finite".into(),
        ));
    }
    if rho >= 1.0 - 1e-9 {
        return Ok(normal_cdf(a.min(b)));
    }
    if rho <= -1.0 + 1e-9 {
        return Ok((normal_cdf(a) + normal_cdf(b) - 1.0).max(0.0));
    }
    if rho == 0.0 {
        return Ok(normal_cdf(a) * normal_cdf(b));
    }
    // Integrate over the axis with the smaller threshold; the integrand
    // support is then as short as possible.
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if a <= -39.0 {
        return Ok(0.0);
    }
    let sigma = (1.0 - rho * rho).sqrt();
    let f = move |t: f64| normal_pdf(t) * normal_cdf((b - rho * t) / sigma);
    let lo = (-39.0_f64).max(a - 78.0);
    let hi = a.min(39.0);
    let mut v = integrate(f, lo, hi, 1e-14);
    if a > 39.0 {
        // the remaining strip t in (39, a] contributes Φ(a) − Φ(39) ≈ 0
        v += normal_cdf(a) - normal_cdf(39.0);
    }
    Ok(v.clamp(0.0, 1.0))
}

fn check_mass(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0,1], got {x}"
        )));
    }
    Ok(())
}

/// Upper stability functional: the largest possible
/// `Pr[X ≤ Φ⁻¹(μ), Y ≤ Φ⁻¹(ν)]` at correlation `rho ∈ [0,1]`.
///
/// Boundary masses `μ, ν ∈ {0, 1}` return the continuous limit.
pub fn stability_upper(rho: f64, mu: f64, nu: f64) -> Result<f64> {
    check_mass("mu", mu)?;
    check_mass("nu", nu)?;
    if !(0.0..=1.0).contains(&rho) || rho.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "stability functionals require rho in [0,1], got {rho}"
        )));
    }
    if mu == 0.0 || nu == 0.0 {
        return Ok(0.0);
    }
    if mu == 1.0 {
        return Ok(nu);
    }
    if nu == 1.0 {
        return Ok(mu);
    }
    binormal_lower(rho, normal_quantile(mu)?, normal_quantile(nu)?)
}

/// Lower stability functional: `Pr[X ≤ Φ⁻¹(μ), Y ≥ Φ⁻¹(1−ν)]` at
/// correlation `rho ∈ [0,1]`; equals the upper functional of the
/// reflected pair `(X, −Y)`.
pub fn stability_lower(rho: f64, mu: f64, nu: f64) -> Result<f64> {
    check_mass("mu", mu)?;
    check_mass("nu", nu)?;
    if !(0.0..=1.0).contains(&rho) || rho.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "stability functionals require rho in [0,1], got {rho}"
        )));
    }
    if mu == 0.0 || nu == 0.0 {
        return Ok(0.0);
    }
    if mu == 1.0 {
        return Ok(nu);
    }
    if nu == 1.0 {
        return Ok(mu);
    }
    binormal_lower(-rho, normal_quantile(mu)?, normal_quantile(nu)?)
}

/// Arguments of the `k`-ary stability recursion: `k−1` correlations and
/// `k` masses.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityQuery {
    rhos: Vec<f64>,
    mus: Vec<f64>,
}

impl StabilityQuery {
    pub fn new(rhos: Vec<f64>, mus: Vec<f64>) -> Result<Self> {
        if mus.is_empty() || rhos.len() + 1 != mus.len() {
            return Err(Error::DimensionMismatch(format!(
                "stability query needs |rhos| = |mus| - 1, got {} and {}",
                rhos.len(),
                mus.len()
            )));
        }
        for &r in &rhos {
            if !(0.0..=1.0).contains(&r) || r.is_nan() {
                return Err(Error::InvalidParameter(format!(
                    "correlation {r} outside [0,1]"
                )));
            }
        }
        for &m in &mus {
            check_mass("mass", m)?;
        }
        Ok(Self { rhos, mus })
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }
}

fn stability_k(
    rhos: &[f64],
    mus: &[f64],
    leaf: &dyn Fn(f64, f64, f64) -> Result<f64>,
) -> Result<f64> {
    if mus.len() == 1 {
        return Ok(mus[0]);
    }
    let inner = stability_k(&rhos[1..], &mus[1..], leaf)?;
    leaf(rhos[0], mus[0], inner)
}

/// `k`-ary upper stability functional, folded right-to-left through the
/// two-argument form.
pub fn stability_upper_k(query: &StabilityQuery) -> Result<f64> {
    stability_k(&query.rhos, &query.mus, &stability_upper)
}

/// `k`-ary lower stability functional. The recursion applies the lower
/// form at every level (the inner argument is itself a lower value).
pub fn stability_lower_k(query: &StabilityQuery) -> Result<f64> {
    stability_k(&query.rhos, &query.mus, &stability_lower)
}

/// Iterates `B_1 = μ`, `B_{i+1} = Γ̄_ρ(μ, B_i)` and returns
/// `[B_1, …, B_kmax]`. The sequence decays like
/// `k^(ρ²−1)/ρ²` as `k` grows.
pub fn bk_sequence(rho: f64, mu: f64, kmax: usize) -> Result<Vec<f64>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bk_sequence requires 0 < rho < 1, got {rho}"
        )));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bk_sequence requires 0 < mu < 1, got {mu}"
        )));
    }
    if kmax < 2 {
        return Err(Error::InvalidParameter(format!(
            "bk_sequence requires kmax >= 2, got {kmax}"
        )));
    }
    let mut out = Vec::with_capacity(kmax);
    out.push(mu);
    let a = normal_quantile(mu)?;
    let mut b = mu;
    for _ in 1..kmax {
        b = binormal_lower(rho, a, normal_quantile(b)?)?;
        out.push(b);
    }
    Ok(out)
}

/// Probability that `k−1` exchangeable standard normals with pairwise
/// correlation `1/3` are simultaneously positive:
/// `∫ φ(t) Φ(t/√2)^(k−1) dt`.
pub fn exchangeable_orthant(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "exchangeable_orthant requires k >= 2, got {k}"
        )));
    }
    let pow = (k - 1) as f64;
    let f = move |t: f64| normal_pdf(t) * (pow * ln_normal_cdf(t / SQRT_2)).exp();
    Ok(integrate(f, -39.0, 39.0, 1e-14).clamp(0.0, 1.0))
}

/// Draws a standard normal via the quantile transform, so a single
/// uniform from the trial generator maps to one variate.
pub fn sample_standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>().clamp(1e-300, 1.0 - 1e-16);
    quantile_guess(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sheppard(rho: f64) -> f64 {
        0.25 + rho.asin() / (2.0 * PI)
    }

    #[test]
    fn cdf_basics() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959_963_985) - 0.975).abs() < 1e-9);
        assert!(normal_cdf(-40.0) >= 0.0);
        assert!((normal_cdf(8.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_round_trip() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        let grid = [
            1e-10, 1e-8, 1e-4, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0 - 1e-4, 1.0 - 1e-8,
            1.0 - 1e-10,
        ];
        for &p in &grid {
            let x = normal_quantile(p).unwrap();
            assert!(
                (normal_cdf(x) - p).abs() <= 1e-12,
                "round trip failed at p={p}: {}",
                (normal_cdf(x) - p).abs()
            );
        }
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn ln_cdf_matches_cdf() {
        for &x in &[-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 5.0] {
            let direct = normal_cdf(x).ln();
            assert!(
                (ln_normal_cdf(x) - direct).abs() < 1e-10 * direct.abs().max(1.0),
                "x={x}"
            );
        }
        // deep tail: compare against the quadratic leading term
        let x = -100.0;
        let v = ln_normal_cdf(x);
        assert!((v - (-5000.0 - (100.0f64 * (2.0 * PI).sqrt()).ln())).abs() < 1e-3);
    }

    #[test]
    fn binormal_independent_and_comonotone() {
        assert!((binormal_lower(0.0, 0.0, 0.0).unwrap() - 0.25).abs() < 1e-14);
        assert!((binormal_lower(1.0, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(
            (binormal_lower(-1.0, 0.3, -0.3).unwrap()
                - (normal_cdf(0.3) + normal_cdf(-0.3) - 1.0).max(0.0))
            .abs()
                < 1e-14
        );
        assert!(binormal_lower(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn binormal_sheppard_identity() {
        for &rho in &[0.2, 1.0 / 3.0, 0.9] {
            let got = binormal_lower(rho, 0.0, 0.0).unwrap();
            assert!(
                (got - sheppard(rho)).abs() < 1e-11,
                "rho={rho}: got {got}, want {}",
                sheppard(rho)
            );
        }
    }

    #[test]
    fn binormal_symmetry_and_monotonicity() {
        for &rho in &[-0.7, -0.2, 0.3, 0.8] {
            let x = binormal_lower(rho, 0.4, -1.1).unwrap();
            let y = binormal_lower(rho, -1.1, 0.4).unwrap();
            assert!((x - y).abs() < 1e-12);
        }
        let mut prev = -1.0;
        for i in 0..=10 {
            let rho = i as f64 / 10.0;
            let v = binormal_lower(rho, 0.2, -0.4).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn stability_pair_properties() {
        // independence
        assert!((stability_upper(0.0, 0.3, 0.5).unwrap() - 0.15).abs() < 1e-12);
        assert!((stability_lower(0.0, 0.3, 0.5).unwrap() - 0.15).abs() < 1e-12);
        // comonotone limits
        assert!((stability_upper(1.0, 0.3, 0.5).unwrap() - 0.3).abs() < 1e-12);
        assert!((stability_lower(1.0, 0.7, 0.6).unwrap() - 0.3).abs() < 1e-12);
        // Sheppard value from the closed form
        let want = sheppard(1.0 / 3.0);
        assert!((stability_upper(1.0 / 3.0, 0.5, 0.5).unwrap() - want).abs() < 1e-10);
        assert!((want - 0.304_086_7).abs() < 1e-7);
        // boundary masses take limits instead of erroring
        assert_eq!(stability_upper(0.4, 0.0, 0.6).unwrap(), 0.0);
        assert_eq!(stability_upper(0.4, 1.0, 0.6).unwrap(), 0.6);
        assert!(stability_upper(0.4, -0.1, 0.6).is_err());
        assert!(stability_upper(1.2, 0.5, 0.6).is_err());
    }

    #[test]
    fn stability_bracket_grid() {
        for i in 0..10 {
            for j in 1..10 {
                for l in 1..10 {
                    let (rho, mu, nu) = (i as f64 / 10.0, j as f64 / 10.0, l as f64 / 10.0);
                    let up = stability_upper(rho, mu, nu).unwrap();
                    let lo = stability_lower(rho, mu, nu).unwrap();
                    assert!(lo <= mu * nu + 1e-12 && mu * nu <= up + 1e-12);
                    assert!(lo >= (mu + nu - 1.0).max(0.0) - 1e-12);
                    assert!(up <= mu.min(nu) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn k_ary_recursion() {
        let q = StabilityQuery::new(vec![0.0, 0.0], vec![0.3, 0.5, 0.7]).unwrap();
        assert!((stability_upper_k(&q).unwrap() - 0.105).abs() < 1e-12);
        assert!((stability_lower_k(&q).unwrap() - 0.105).abs() < 1e-12);

        let q = StabilityQuery::new(vec![1.0, 1.0], vec![0.5, 0.5, 0.5]).unwrap();
        assert!((stability_upper_k(&q).unwrap() - 0.5).abs() < 1e-12);

        let r3 = 1.0 / 3.0f64.sqrt();
        let inner = stability_upper(r3, 0.5, 0.5).unwrap();
        assert!((inner - sheppard(r3)).abs() < 1e-10);
        let q = StabilityQuery::new(vec![r3, r3], vec![0.5, 0.5, 0.5]).unwrap();
        let got = stability_upper_k(&q).unwrap();
        let want = stability_upper(r3, 0.5, inner).unwrap();
        assert!((got - want).abs() < 1e-12);

        assert!(StabilityQuery::new(vec![0.2], vec![0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn bk_sequence_shape() {
        let bk = bk_sequence(0.5, 0.5, 50).unwrap();
        assert_eq!(bk.len(), 50);
        assert_eq!(bk[0], 0.5);
        assert!((bk[1] - sheppard(0.5)).abs() < 1e-10);
        for w in bk.windows(2) {
            assert!(w[1] < w[0] && w[1] > 0.0);
        }
        // small rho decays near-geometrically: the step ratio starts at
        // mu + asin(rho)/(2 pi·mu) and drifts up only slowly
        let fast = bk_sequence(0.1, 0.5, 20).unwrap();
        for (i, w) in fast.windows(2).enumerate() {
            let cap = if i + 2 <= 8 { 0.6 } else { 2.0 / 3.0 };
            assert!(w[1] / w[0] <= cap, "k={} ratio={}", i + 2, w[1] / w[0]);
        }
        assert!(bk_sequence(0.0, 0.5, 10).is_err());
        assert!(bk_sequence(1.0, 0.5, 10).is_err());
    }

    #[test]
    fn orthant_small_k() {
        assert!((exchangeable_orthant(2).unwrap() - 0.5).abs() < 1e-12);
        let want = sheppard(1.0 / 3.0);
        assert!((exchangeable_orthant(3).unwrap() - want).abs() < 1e-8);
        assert!(exchangeable_orthant(1).is_err());
    }

    #[test]
    fn orthant_tracks_log_corrected_square_decay() {
        // k·P stays within a factor 2 of 2·sqrt(2π)·sqrt(ln k)/k across
        // three decades
        for &k in &[50usize, 500, 5000] {
            let p = exchangeable_orthant(k).unwrap();
            let track =
                2.0 * (2.0 * std::f64::consts::PI).sqrt() * (k as f64).ln().sqrt()
                    / (k as f64).powi(2);
            let ratio = p / track;
            assert!((0.5..=2.0).contains(&ratio), "k={k}: ratio {ratio}");
        }
    }

    #[test]
    fn orthant_matches_representation_monte_carlo() {
        // sample the X_a / Z_{1a} representation of the exchangeable
        // vector directly and compare the raw indicator frequency
        let k = 10usize;
        let want = exchangeable_orthant(k).unwrap();
        let est = crate::mc::sample_mean(3, 91, 2_000_000, |rng| {
            let x1 = sample_standard_normal(rng);
            let all_positive = (1..k).all(|_| {
                let xa = sample_standard_normal(rng);
                let z = sample_standard_normal(rng);
                x1 - xa + z > 0.0
            });
            f64::from(all_positive)
        });
        assert!(
            (est.mean - want).abs() <= 3.0 * est.stderr,
            "mc {} ± {} vs quadrature {want}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn binormal_quadrature_vs_monte_carlo() {
        // 30 seeded random (rho, a, b) triples, 3-sigma agreement
        use rand::Rng;
        for case in 0..30u64 {
            let mut rng = crate::mc::trial_rng(2024, 90, case);
            let rho = rng.random_range(-0.95..0.95);
            let a = rng.random_range(-2.0..2.0);
            let b = rng.random_range(-2.0..2.0);
            let want = binormal_lower(rho, a, b).unwrap();
            let sigma = (1.0f64 - rho * rho).sqrt();
            let est = crate::mc::sample_mean(11, case, 40_000, |r| {
                let x: f64 = crate::gaussian::sample_standard_normal(r);
                let y = rho * x + sigma * crate::gaussian::sample_standard_normal(r);
                f64::from((x <= a && y <= b) as u8)
            });
            assert!(
                (est.mean - want).abs() <= 3.0 * est.stderr + 1e-4,
                "rho={rho} a={a} b={b}: mc={} quad={want}",
                est.mean
            );
        }
    }
}
