//! Probability that at time `t` the first class particle is still the
//! leftmost particle and sits at `x`, started from `(Y, 21..1)`:
//!
//! ```text
//! ∮..∮ (1 - ξ_1) ∏_{i<j} (ξ_j - ξ_i)/(1 - ξ_i) ∏_i ξ_i^{x - y_i - 1} e^{ε(ξ_i) t} / (1 - ξ_i)
//! ```
//!
//! Writing `∏_{i<j}(ξ_j - ξ_i) = Σ_σ sgn σ ∏_i ξ_i^{σ(i) - 1}` and collecting
//! the powers of `1 - ξ_i` (one from each `j > i`, one from the last product,
//! minus the numerator for `i = 1`) gives
//!
//! ```text
//! Σ_σ sgn σ ∏_i I(x - y_i - 1 + σ(i) - 1, -(N - i + 1) + [i = 1], t)
//! ```
//!
//! which is also the determinant of the `N × N` matrix of those integrals.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use twofloat::TwoFloat;

use crate::combinatorics::{enumerate_with_cap, weak_compositions};
use crate::contour::{laurent_coefficient, QuadratureSpec};
use crate::error::{Error, Result};
use crate::scalar::Matrix;

use super::{
    check_quadrature_time, energy_factor, permutation_sum, quadrature_eval, Configuration,
    Evaluation, Method, ResidueTable, DOUBLE_SUM_MAX_N, RESIDUE_MAX_N,
};

/// `(1 - ξ)`-exponent of variable `i` (1-based) in the two-species integrand.
fn head_exponent(n: usize, i: usize) -> i64 {
    -((n - i + 1) as i64) + i64::from(i == 1)
}

/// `(1 - ξ)`-exponent of variable `i` in the single-species integrand.
fn tasep_exponent(n: usize, i: usize) -> i64 {
    -((n - i + 1) as i64)
}

/// Matrix `[I(x - y_i - 1 + j + shift, e_i)]_{i, j}` with 0-based `j`.
fn integral_matrix(
    ys: &[i64],
    x: i64,
    shift: i64,
    exponent: impl Fn(usize) -> i64,
    table: &mut ResidueTable,
) -> Vec<Vec<f64>> {
    let n = ys.len();
    (1..=n)
        .map(|i| {
            (0..n as i64)
                .map(|j| table.get(x - ys[i - 1] - 1 + j + shift, exponent(i)))
                .collect()
        })
        .collect()
}

/// Exact determinant of the `t = 0` matrix of Laurent coefficients.
fn exact_integral_determinant(
    ys: &[i64],
    x: i64,
    shift: i64,
    exponent: impl Fn(usize) -> i64,
) -> f64 {
    let n = ys.len();
    let rows = (1..=n)
        .map(|i| {
            (0..n as i64)
                .map(|j| {
                    BigRational::from_integer(laurent_coefficient(x - ys[i - 1] - 1 + j + shift, exponent(i)))
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(rows).determinant().to_f64().unwrap_or(f64::NAN)
}

fn float_determinant(rows: Vec<Vec<f64>>) -> f64 {
    Matrix::from_rows(rows).determinant()
}

fn check_head(y: &Configuration) -> Result<()> {
    if !y.is_head() {
        return Err(Error::Domain(format!(
            "initial species word {} is not 21..1",
            y.species_word()
        )));
    }
    Ok(())
}

/// Two-species leftmost-particle probability for arbitrary initial positions.
pub fn leftmost_probability(y: &Configuration, x: i64, t: f64, method: &Method) -> Result<Evaluation> {
    check_head(y)?;
    let n = y.n();
    let ys = y.positions();
    let exponent = |i| head_exponent(n, i);
    if x < ys[0] {
        return Ok(Evaluation::exact(0.0, method.name()));
    }
    match method {
        Method::Quadrature(spec) if t > 0.0 => leftmost_quadrature(ys, x, t, spec, false),
        Method::Determinant => {
            if t == 0.0 {
                return Ok(Evaluation::exact(exact_integral_determinant(ys, x, 0, exponent), "determinant"));
            }
            let mut table = ResidueTable::new(t)?;
            let m = integral_matrix(ys, x, 0, exponent, &mut table);
            Ok(Evaluation::exact(float_determinant(m), "determinant"))
        }
        _ => {
            let mut table = ResidueTable::new(t)?;
            let m = integral_matrix(ys, x, 0, exponent, &mut table);
            Ok(Evaluation::exact(permutation_sum(&m, RESIDUE_MAX_N)?, "residue"))
        }
    }
}

/// Single-species companion: the prefactor `1 - ξ_1` becomes `1 - ξ_1 .. ξ_N`.
/// The second term shifts every power of `ξ` by one.
pub fn tasep_leftmost_probability(
    y: &Configuration,
    x: i64,
    t: f64,
    method: &Method,
) -> Result<Evaluation> {
    if !y.is_uniform() {
        return Err(Error::Domain(format!(
            "species word {} is not single-species",
            y.species_word()
        )));
    }
    let n = y.n();
    let ys = y.positions();
    let exponent = |i| tasep_exponent(n, i);
    if x < ys[0] {
        return Ok(Evaluation::exact(0.0, method.name()));
    }
    match method {
        Method::Quadrature(spec) if t > 0.0 => leftmost_quadrature(ys, x, t, spec, true),
        Method::Determinant => {
            let value = if t == 0.0 {
                exact_integral_determinant(ys, x, 0, exponent)
                    - exact_integral_determinant(ys, x, 1, exponent)
            } else {
                let mut table = ResidueTable::new(t)?;
                float_determinant(integral_matrix(ys, x, 0, exponent, &mut table))
                    - float_determinant(integral_matrix(ys, x, 1, exponent, &mut table))
            };
            Ok(Evaluation::exact(value, "determinant"))
        }
        _ => {
            let mut table = ResidueTable::new(t)?;
            let a = permutation_sum(&integral_matrix(ys, x, 0, exponent, &mut table), RESIDUE_MAX_N)?;
            let b = permutation_sum(&integral_matrix(ys, x, 1, exponent, &mut table), RESIDUE_MAX_N)?;
            Ok(Evaluation::exact(a - b, "residue"))
        }
    }
}

fn leftmost_quadrature(
    ys: &[i64],
    x: i64,
    t: f64,
    spec: &QuadratureSpec,
    single_species: bool,
) -> Result<Evaluation> {
    check_quadrature_time(t)?;
    let n = ys.len();
    let one = Complex64::new(1.0, 0.0);
    let integrand = |xi: &[Complex64]| -> Complex64 {
        let prefactor = if single_species {
            one - xi.iter().product::<Complex64>()
        } else {
            one - xi[0]
        };
        let mut v = prefactor;
        for i in 0..n {
            for j in i + 1..n {
                v *= (xi[j] - xi[i]) / (one - xi[i]);
            }
            v *= xi[i].powi((x - ys[i] - 1) as i32) * energy_factor(xi[i], t) / (one - xi[i]);
        }
        v
    };
    quadrature_eval(integrand, n, spec)
}

fn sign_of_half_n(n: usize) -> f64 {
    if (n * (n - 1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Shifted step initial data `y_1 = 1`, `y_i = i + l`:
///
/// ```text
/// (-1)^{N(N-1)/2}/N! ∮..∮ h_l(ξ) ∏_{i<j}(ξ_j - ξ_i)² ∏_i (ξ_i - 1)^{-(N-1)} ξ_i^{x-N-l-1} e^{ε(ξ_i) t}
/// ```
///
/// The residue path expands `h_l` into monomials and the squared Vandermonde
/// into a double permutation sum; the determinant path exists for `l = 0`.
pub fn leftmost_probability_shifted_step(
    l: u32,
    n: usize,
    x: i64,
    t: f64,
    method: &Method,
) -> Result<Evaluation> {
    if n == 0 {
        return Err(Error::Size { n, cap: DOUBLE_SUM_MAX_N });
    }
    if x < 1 {
        return Ok(Evaluation::exact(0.0, method.name()));
    }
    match method {
        Method::Quadrature(spec) if t > 0.0 => shifted_step_quadrature(l, n, x, t, spec),
        Method::Determinant if l == 0 => leftmost_probability_step_det(n, x, t),
        Method::Determinant => Err(Error::Domain(
            "the determinant form is available only for l = 0".into(),
        )),
        _ => shifted_step_residue(l, n, x, t),
    }
}

fn shifted_step_residue(l: u32, n: usize, x: i64, t: f64) -> Result<Evaluation> {
    let perms = enumerate_with_cap(n, DOUBLE_SUM_MAX_N)?;
    let mut table = ResidueTable::new(t)?;
    let sign_j = if (n - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let c = x - n as i64 - l as i64 - 1;
    let monomials = weak_compositions(n, l as usize);
    let max_m = l as i64;
    // J(c + s) for s = m_i + σ(i) + τ(i) - 2 ∈ [0, l + 2N - 2]
    let j_values: Vec<f64> = (0..=max_m + 2 * n as i64 - 2)
        .map(|s| sign_j * table.get(c + s, -(n as i64 - 1)))
        .collect();
    // the N!² terms cancel heavily, so products and sum are carried in double-double
    let mut sum = TwoFloat::from(0.0);
    for m in &monomials {
        for sigma in &perms {
            for tau in &perms {
                let mut prod = TwoFloat::from((sigma.sign() * tau.sign()) as f64);
                for i in 0..n {
                    let s = m[i] + sigma.images()[i] + tau.images()[i] - 2;
                    prod *= j_values[s];
                }
                sum += prod;
            }
        }
    }
    let factorial: f64 = (1..=n).map(|v| v as f64).product();
    Ok(Evaluation::exact(sign_of_half_n(n) * f64::from(sum) / factorial, "residue"))
}

/// `h_l(ξ)` by the recurrence over variables.
fn complete_symmetric(xi: &[Complex64], l: usize) -> Complex64 {
    let mut h = vec![Complex64::new(0.0, 0.0); l + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for &v in xi {
        for d in 1..=l {
            let prev = h[d - 1];
            h[d] += v * prev;
        }
    }
    h[l]
}

fn shifted_step_quadrature(
    l: u32,
    n: usize,
    x: i64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Evaluation> {
    check_quadrature_time(t)?;
    let factorial: f64 = (1..=n).map(|v| v as f64).product();
    let prefactor = sign_of_half_n(n) / factorial;
    let power = (x - n as i64 - l as i64 - 1) as i32;
    let one = Complex64::new(1.0, 0.0);
    let integrand = |xi: &[Complex64]| -> Complex64 {
        let mut v = complete_symmetric(xi, l as usize) * prefactor;
        for i in 0..n {
            for j in i + 1..n {
                let d = xi[j] - xi[i];
                v *= d * d;
            }
            v *= (xi[i] - one).powi(-(n as i32 - 1)) * xi[i].powi(power) * energy_factor(xi[i], t);
        }
        v
    };
    quadrature_eval(integrand, n, spec)
}

/// Step initial data as an `N × N` determinant:
/// `(-1)^{N(N-1)/2} det[∮ ξ^{i+j+x-N-1} (ξ - 1)^{-(N-1)} e^{(1/ξ - 1)t}]_{i,j=0}^{N-1}`.
pub fn leftmost_probability_step_det(n: usize, x: i64, t: f64) -> Result<Evaluation> {
    if n == 0 {
        return Err(Error::Size { n, cap: RESIDUE_MAX_N });
    }
    if x < 1 {
        return Ok(Evaluation::exact(0.0, "determinant"));
    }
    let e = -(n as i64 - 1);
    let sign_j: i64 = if (n - 1).is_multiple_of(2) { 1 } else { -1 };
    let k = |i: usize, j: usize| (i + j) as i64 + x - n as i64 - 1;
    let det = if t == 0.0 {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| BigRational::from_integer(laurent_coefficient(k(i, j), e) * BigInt::from(sign_j)))
                    .collect()
            })
            .collect();
        Matrix::from_rows(rows).determinant().to_f64().unwrap_or(f64::NAN)
    } else {
        let mut table = ResidueTable::new(t)?;
        let rows = (0..n)
            .map(|i| (0..n).map(|j| sign_j as f64 * table.get(k(i, j), e)).collect())
            .collect();
        float_determinant(rows)
    };
    Ok(Evaluation::exact(sign_of_half_n(n) * det, "determinant"))
}
