//! One-dimensional contour integrals `(1/2πi) ∮ ξ^k (1 - ξ)^e e^{(1/ξ - 1)t} dξ`
//! over origin-centred circles of radius below 1, evaluated two ways.
//!
//! The residue series expands `e^{t/ξ} = Σ_n t^n ξ^{-n} / n!` and
//! `(1 - ξ)^e = Σ_j c_j ξ^j` and keeps the `ξ^{-1}` coefficient, i.e. the terms
//! with `n = k + j + 1`:
//!
//! ```text
//! I(k, e, t) = e^{-t} Σ_{j ≥ max(0, -k-1)} c_j t^{k+j+1} / (k+j+1)!
//! c_j = (-1)^j C(e, j)          e ≥ 0 (finite)
//! c_j = C(-e - 1 + j, j)        e < 0 (convergent for every t)
//! ```
//!
//! The trapezoidal rule on the circle is the independent check. It converges
//! geometrically for integrands analytic in an annulus around the contour.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, KahanSum};

/// Above this time the series terms are formed in log space.
const LOG_SPACE_THRESHOLD: f64 = 30.0;
const SERIES_REL_CUTOFF: f64 = 1e-18;
const SERIES_MAX_TERMS: usize = 10_000_000;

/// `∮ ξ^k (1 - ξ)^e e^{(1/ξ - 1)t} dξ / 2πi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidueIntegrand {
    pub k: i64,
    pub e: i64,
    pub t: f64,
}

impl ResidueIntegrand {
    pub fn new(k: i64, e: i64, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
        }
        Ok(ResidueIntegrand { k, e, t })
    }

    /// The integrand itself (including the `e^{-t}` factor) at `ξ`.
    pub fn integrand(&self, xi: Complex64) -> Complex64 {
        xi.powi(self.k as i32)
            * (Complex64::one() - xi).powi(self.e as i32)
            * ((xi.inv() - 1.0) * self.t).exp()
    }
}

fn binomial_f64(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

fn binomial_big(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * BigInt::from(n - k + i) / BigInt::from(i);
    }
    acc
}

/// Coefficient of `ξ^j` in `(1 - ξ)^e`, exactly.
pub fn power_series_coefficient(e: i64, j: i64) -> BigInt {
    if j < 0 {
        return BigInt::zero();
    }
    if e >= 0 {
        let c = binomial_big(e, j);
        if j % 2 == 1 {
            -c
        } else {
            c
        }
    } else {
        binomial_big(-e - 1 + j, j)
    }
}

/// The `t = 0` value: the coefficient of `ξ^{-1-k}` in `(1 - ξ)^e`.
pub fn laurent_coefficient(k: i64, e: i64) -> BigInt {
    power_series_coefficient(e, -k - 1)
}

fn coefficient_f64(e: i64, j: i64) -> f64 {
    let c = if e >= 0 { binomial_f64(e, j) } else { binomial_f64(-e - 1 + j, j) };
    if e >= 0 && j % 2 == 1 {
        -c
    } else {
        c
    }
}

/// `c_{j+1} / c_j`.
fn coefficient_ratio(e: i64, j: i64) -> f64 {
    if e >= 0 {
        -((e - j) as f64) / (j + 1) as f64
    } else {
        (-e + j) as f64 / (j + 1) as f64
    }
}

/// Exact residue series for `∮ ξ^k (1 - ξ)^e e^{(1/ξ - 1)t}`.
pub fn residue_value(spec: &ResidueIntegrand) -> f64 {
    let ResidueIntegrand { k, e, t } = *spec;
    let j0 = (-k - 1).max(0);
    if e >= 0 && j0 > e {
        return 0.0;
    }
    if t == 0.0 {
        return laurent_coefficient(k, e).to_f64().unwrap_or(f64::NAN);
    }
    let j_end = if e >= 0 { Some(e) } else { None };
    let n0 = k + j0 + 1;
    if t <= LOG_SPACE_THRESHOLD {
        series_direct(e, t, j0, n0, j_end)
    } else {
        series_log_space(e, t, j0, n0, j_end)
    }
}

/// Convenience wrapper; panics on a negative or non-finite time.
pub fn residue(k: i64, e: i64, t: f64) -> f64 {
    residue_value(&ResidueIntegrand::new(k, e, t).expect("invalid residue integrand"))
}

fn series_done(term: f64, prev: f64, sum: f64, n: i64, t: f64) -> bool {
    term.abs() <= SERIES_REL_CUTOFF * sum.abs() && term.abs() < prev.abs() && (n as f64) > t
}

fn series_direct(e: i64, t: f64, j0: i64, n0: i64, j_end: Option<i64>) -> f64 {
    let mut term = coefficient_f64(e, j0) * (-t).exp();
    for i in 1..=n0 {
        term *= t / i as f64;
    }
    let mut sum = KahanSum::new();
    sum.add(term);
    let (mut j, mut n) = (j0, n0);
    for _ in 0..SERIES_MAX_TERMS {
        if j_end.is_some_and(|end| j >= end) {
            break;
        }
        let prev = term;
        term *= coefficient_ratio(e, j) * t / (n + 1) as f64;
        j += 1;
        n += 1;
        sum.add(term);
        if j_end.is_none() && series_done(term, prev, sum.value(), n, t) {
            break;
        }
    }
    sum.value()
}

fn series_log_space(e: i64, t: f64, j0: i64, n0: i64, j_end: Option<i64>) -> f64 {
    let c0 = coefficient_f64(e, j0);
    let mut sign = c0.signum();
    let mut log_term = -t + n0 as f64 * t.ln() - ln_gamma(n0 as f64 + 1.0) + c0.abs().ln();
    let mut sum = KahanSum::new();
    let mut term = sign * log_term.exp();
    sum.add(term);
    let (mut j, mut n) = (j0, n0);
    let ln_t = t.ln();
    for _ in 0..SERIES_MAX_TERMS {
        if j_end.is_some_and(|end| j >= end) {
            break;
        }
        let ratio = coefficient_ratio(e, j);
        if ratio == 0.0 {
            break;
        }
        sign *= ratio.signum();
        log_term += ratio.abs().ln() + ln_t - ((n + 1) as f64).ln();
        j += 1;
        n += 1;
        let prev = term;
        term = sign * log_term.exp();
        sum.add(term);
        if j_end.is_none() && series_done(term, prev, sum.value(), n, t) {
            break;
        }
    }
    sum.value()
}

/// Trapezoidal rule parameters on `|ξ| = radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub radius: f64,
    /// Starting number of nodes per variable; a power of two, at least 8.
    pub points: usize,
    /// Relative tolerance on successive doublings.
    pub tolerance: f64,
    /// Largest node count per variable before giving up.
    pub max_points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { radius: 0.5, points: 16, tolerance: 1e-12, max_points: 1 << 20 }
    }
}

impl QuadratureSpec {
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(Error::Domain(format!("radius {} not in (0, 1)", self.radius)));
        }
        if self.points < 8 || !self.points.is_power_of_two() {
            return Err(Error::Domain(format!(
                "node count {} must be a power of two ≥ 8",
                self.points
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Radius near the saddle of `|ξ^{k+1} e^{t/ξ}|`, clamped to `[0.01, 0.5]`.
///
/// For small values of the integral a contour through the saddle keeps the
/// integrand comparable to the result, so relative accuracy survives roundoff.
pub fn saddle_radius(k: i64, t: f64) -> f64 {
    if k < 0 || t <= 0.0 {
        return 0.5;
    }
    (t / (k + 1) as f64).clamp(0.01, 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Nodes per variable at the accepted value.
    pub points: usize,
    /// `|I_M - I_{M/2}|`, the error estimate.
    pub delta: f64,
}

fn nodes(radius: f64, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / m as f64))
        .collect()
}

/// Roundoff floor below which successive values cannot be told apart.
fn roundoff_floor(scale: f64) -> f64 {
    64.0 * f64::EPSILON * scale
}

fn converged(delta: f64, value: Complex64, scale: f64, tol: f64) -> bool {
    delta <= tol * value.norm() || delta <= roundoff_floor(scale)
}

/// One-dimensional adaptive trapezoidal rule for `(1/2πi) ∮ f(ξ) dξ`.
pub fn circle_quadrature<F>(f: F, spec: &QuadratureSpec) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    spec.validate()?;
    let eval = |m: usize| -> (Complex64, f64) {
        let terms: Vec<Complex64> = nodes(spec.radius, m).into_par_iter().map(|x| f(x) * x).collect();
        let scale = terms.iter().map(|v| v.norm()).sum::<f64>() / m as f64;
        (pairwise_sum(&terms) / m as f64, scale)
    };
    adapt(spec, spec.max_points, eval)
}

fn adapt<E>(spec: &QuadratureSpec, max_points: usize, eval: E) -> Result<QuadratureResult>
where
    E: Fn(usize) -> (Complex64, f64),
{
    let mut m = spec.points;
    let (mut prev, _) = eval(m);
    let mut delta = f64::INFINITY;
    while m * 2 <= max_points {
        m *= 2;
        let (value, scale) = eval(m);
        delta = (value - prev).norm();
        if converged(delta, value, scale, spec.tolerance) {
            return Ok(QuadratureResult { value, points: m, delta });
        }
        prev = value;
    }
    Err(Error::Accuracy { value: prev.re, delta, points: m })
}

/// Largest total node count a tensor grid may use.
pub const MULTI_CONTOUR_BUDGET_LOG2: u32 = 27;

/// Tensor-product trapezoidal rule for `(1/2πi)^N ∮..∮ F(ξ_1..ξ_N) dξ_1..dξ_N`
/// with identical circles. Work is split over the first variable and reduced
/// pairwise in index order, so the result does not depend on thread count.
pub fn multi_contour<F>(f: F, n: usize, spec: &QuadratureSpec) -> Result<QuadratureResult>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("need at least one variable".into()));
    }
    let per_dim_log2 = MULTI_CONTOUR_BUDGET_LOG2 / n as u32;
    let budget_max = 1usize << per_dim_log2;
    if spec.points * 2 > budget_max {
        return Err(Error::Budget(format!(
            "{n} variables with {} starting nodes exceed 2^{MULTI_CONTOUR_BUDGET_LOG2} evaluations",
            spec.points
        )));
    }
    let max_points = spec.max_points.min(budget_max);
    let eval = |m: usize| -> (Complex64, f64) {
        let grid = nodes(spec.radius, m);
        let inner = m.pow(n as u32 - 1);
        let partial: Vec<(Complex64, f64)> = (0..m)
            .into_par_iter()
            .map(|first| {
                let mut idx = vec![0usize; n];
                idx[0] = first;
                let mut buf: Vec<Complex64> = idx.iter().map(|&i| grid[i]).collect();
                let mut acc = Complex64::zero();
                let mut scale = 0.0;
                for _ in 0..inner {
                    let jac: Complex64 = buf.iter().product();
                    let v = f(&buf) * jac;
                    acc += v;
                    scale += v.norm();
                    // odometer over variables 2..N
                    for d in (1..n).rev() {
                        idx[d] += 1;
                        if idx[d] < m {
                            buf[d] = grid[idx[d]];
                            break;
                        }
                        idx[d] = 0;
                        buf[d] = grid[0];
                    }
                }
                (acc, scale)
            })
            .collect();
        let total = m.pow(n as u32) as f64;
        let sums: Vec<Complex64> = partial.iter().map(|p| p.0).collect();
        let scale = partial.iter().map(|p| p.1).sum::<f64>() / total;
        (pairwise_sum(&sums) / total, scale)
    };
    adapt(spec, max_points, eval)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(t: f64, n: u32) -> f64 {
        (-t).exp() * t.powi(n as i32) / (1..=n).map(f64::from).product::<f64>()
    }

    #[test]
    fn residue_examples() {
        assert!((residue(-1, 0, 1.0) - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(residue(-2, 0, 1.0), 0.0);
        for t in [0.1f64, 1.0, 5.0, 40.0] {
            let expected = 1.0 - (-t).exp();
            assert!((residue(0, -1, t) - expected).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn residue_at_zero_time_is_laurent_coefficient() {
        assert_eq!(residue(-1, 0, 0.0), 1.0);
        assert_eq!(residue(0, 0, 0.0), 0.0);
        // ξ^{-3} (1-ξ)^{-2}: coefficient of ξ^2 in (1-ξ)^{-2} is 3
        assert_eq!(residue(-3, -2, 0.0), 3.0);
        // ξ^{-2} (1-ξ)^3: coefficient of ξ^1 is -3
        assert_eq!(residue(-2, 3, 0.0), -3.0);
        assert_eq!(laurent_coefficient(-5, 2), BigInt::zero());
    }

    #[test]
    fn residue_with_zero_power_is_poisson() {
        for t in [0.1, 1.0, 5.0, 35.0] {
            for k in -1..12 {
                let p = poisson(t, (k + 1) as u32);
                let r = residue(k, 0, t);
                assert!((r - p).abs() <= 1e-13 * p.max(1e-300), "k={k} t={t}: {r} vs {p}");
            }
            assert_eq!(residue(-3, 0, t), 0.0);
        }
    }

    #[test]
    fn log_space_matches_direct_near_threshold() {
        for (k, e) in [(0, -3), (5, -1), (2, 2), (-2, -4)] {
            let j0 = (-k - 1).max(0);
            let end = if e >= 0 { Some(e) } else { None };
            let t = 29.0;
            let a = series_direct(e, t, j0, k + j0 + 1, end);
            let b = series_log_space(e, t, j0, k + j0 + 1, end);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "k={k} e={e}: {a} vs {b}");
        }
    }

    #[test]
    fn quadrature_basic_integrands() {
        let spec = QuadratureSpec::default();
        let r = circle_quadrature(|x| x.inv(), &spec).unwrap();
        assert!((r.value - Complex64::one()).norm() < 1e-15);
        let r = circle_quadrature(|x| x.powi(3), &spec).unwrap();
        assert!(r.value.norm() < 1e-15);
    }

    #[test]
    fn quadrature_matches_residue_series() {
        let spec = QuadratureSpec::default();
        let ig = ResidueIntegrand::new(-1, -1, 1.0).unwrap();
        let q = circle_quadrature(|x| ig.integrand(x), &spec).unwrap();
        assert!((q.value.re - residue_value(&ig)).abs() < 1e-12);
        assert!(q.value.im.abs() < 1e-12);
    }

    #[test]
    fn quadrature_rejects_bad_specs() {
        let f = |x: Complex64| x;
        assert!(circle_quadrature(f, &QuadratureSpec::default().with_radius(1.0)).is_err());
        assert!(circle_quadrature(f, &QuadratureSpec::default().with_points(12)).is_err());
        assert!(circle_quadrature(f, &QuadratureSpec::default().with_points(4)).is_err());
    }

    #[test]
    fn quadrature_reports_non_convergence() {
        let spec = QuadratureSpec { max_points: 32, ..QuadratureSpec::default() };
        // essential singularity at 0 with a huge time needs far more nodes
        let ig = ResidueIntegrand::new(3, 0, 60.0).unwrap();
        let err = circle_quadrature(|x| ig.integrand(x), &spec).unwrap_err();
        assert!(matches!(err, Error::Accuracy { points: 32, .. }));
    }

    #[test]
    fn multi_contour_examples() {
        let spec = QuadratureSpec::default();
        let r = multi_contour(|x| x.iter().map(|v| v.inv()).product(), 3, &spec).unwrap();
        assert!((r.value - Complex64::one()).norm() < 1e-14);

        let a = ResidueIntegrand::new(0, -1, 0.7).unwrap();
        let b = ResidueIntegrand::new(-2, -2, 0.7).unwrap();
        let sep = multi_contour(|x| a.integrand(x[0]) * b.integrand(x[1]), 2, &spec).unwrap();
        let pa = circle_quadrature(|x| a.integrand(x), &spec).unwrap().value;
        let pb = circle_quadrature(|x| b.integrand(x), &spec).unwrap().value;
        assert!((sep.value - pa * pb).norm() < 1e-12);
        assert!((sep.value.re - residue_value(&a) * residue_value(&b)).abs() < 1e-12);
    }

    #[test]
    fn multi_contour_budget_guard() {
        let spec = QuadratureSpec::default().with_points(1 << 10);
        assert!(matches!(
            multi_contour(|_| Complex64::one(), 3, &spec),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn saddle_radius_is_clamped() {
        assert_eq!(saddle_radius(-3, 1.0), 0.5);
        assert_eq!(saddle_radius(6, 0.1), 0.1 / 7.0);
        assert_eq!(saddle_radius(0, 5.0), 0.5);
        assert_eq!(saddle_radius(1000, 0.1), 0.01);
    }
}
