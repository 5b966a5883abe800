//! Exact-rational checks of the algebraic identities behind the
//! leftmost-particle formulas.
//!
//! Every identity is a rational-function identity, so after clearing
//! denominators it is a polynomial identity of bounded degree `d`. Random
//! points whose coordinates put at most mass `μ` on any single value make a
//! false identity vanish with probability at most `d μ` per point; the suite
//! report records both numbers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bethe::{amplitude_center, amplitude_column, braid_check, center_index, BraidReport, SpectralPoint};
use crate::combinatorics::{enumerate_with_cap, weak_compositions, Permutation};
use crate::error::{Error, Result};
use crate::scalar::{pow_int, rational};

type Q = BigRational;

/// Largest `N` for the `N!`-term identities.
pub const SUM_IDENTITY_MAX_N: usize = 7;
/// Largest `N` for identities that multiply `2^N × 2^N` matrices.
pub const MATRIX_IDENTITY_MAX_N: usize = 5;

/// A point with exact rational, pairwise distinct components, none 0 or 1.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPoint {
    xi: Vec<Q>,
}

impl RationalPoint {
    pub fn new(xi: Vec<Q>) -> Result<Self> {
        SpectralPoint::new(xi.clone())?;
        Ok(RationalPoint { xi })
    }

    /// `"1/2,1/3,2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let xi = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                let (num, den) = part.split_once('/').unwrap_or((part, "1"));
                let parse = |v: &str| {
                    v.trim()
                        .parse::<BigInt>()
                        .map_err(|_| Error::InvalidPoint(format!("cannot parse {part:?}")))
                };
                let den = parse(den)?;
                if den.is_zero() {
                    return Err(Error::InvalidPoint(format!("zero denominator in {part:?}")));
                }
                Ok(Q::new(parse(num)?, den))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(xi)
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    /// `ξ_j`, 1-based.
    pub fn xi(&self, j: usize) -> &Q {
        &self.xi[j - 1]
    }

    pub fn components(&self) -> &[Q] {
        &self.xi
    }

    pub fn in_unit_interval(&self) -> bool {
        self.xi.iter().all(|v| v > &Q::zero() && v < &Q::one())
    }

    /// The change of variables `ξ'_i = 1/ξ_{N-i+1}`.
    pub fn reversed_inverse(&self) -> RationalPoint {
        RationalPoint { xi: self.xi.iter().rev().map(|v| Q::one() / v).collect() }
    }

    pub fn spectral(&self) -> SpectralPoint<Q> {
        SpectralPoint::new(self.xi.clone()).expect("validated on construction")
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.xi.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Primes used as denominators of random points.
pub fn sampling_primes() -> Vec<u64> {
    (503..=997u64).filter(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

/// Largest probability any single value receives as a coordinate: `1/(#primes · 502)`.
pub fn point_mass() -> f64 {
    1.0 / (sampling_primes().len() as f64 * 502.0)
}

/// Random point: each coordinate is `p/q` with `q` a random prime in
/// `[503, 997]` and `p` uniform in `[1, q - 1]`; coordinates are redrawn until
/// pairwise distinct.
pub fn sample_point<R: Rng>(rng: &mut R, n: usize) -> RationalPoint {
    let primes = sampling_primes();
    let mut xi: Vec<Q> = Vec::with_capacity(n);
    while xi.len() < n {
        let q = primes[rng.random_range(0..primes.len())] as i64;
        let p = rng.random_range(1..q);
        let v = rational(p, q);
        if !xi.contains(&v) {
            xi.push(v);
        }
    }
    RationalPoint { xi }
}

/// Both sides of an identity, evaluated exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Q,
    pub rhs: Q,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// `∏_{i<j} (ξ_j - ξ_i)`.
pub fn vandermonde(xi: &[Q]) -> Q {
    let mut v = Q::one();
    for i in 0..xi.len() {
        for j in i + 1..xi.len() {
            v *= &xi[j] - &xi[i];
        }
    }
    v
}

/// `h_l(ξ_1, .., ξ_N)` as a sum over monomials.
pub fn complete_symmetric(xi: &[Q], l: usize) -> Q {
    weak_compositions(xi.len(), l)
        .iter()
        .map(|m| xi.iter().zip(m).fold(Q::one(), |acc, (x, &e)| acc * pow_int(x, e as i64)))
        .fold(Q::zero(), |a, b| a + b)
}

/// A product of rationals kept as one unreduced fraction until the end.
struct Term {
    num: BigInt,
    den: BigInt,
}

impl Term {
    fn signed(sign: i64) -> Self {
        Term { num: BigInt::from(sign), den: BigInt::one() }
    }

    fn mul(&mut self, q: &Q) {
        self.num *= q.numer();
        self.den *= q.denom();
    }

    fn div(&mut self, q: &Q) {
        self.num *= q.denom();
        self.den *= q.numer();
    }

    fn negate(&mut self) {
        self.num = -std::mem::take(&mut self.num);
    }

    fn finish(self) -> Q {
        Q::new(self.num, self.den)
    }
}

/// Per-point tables shared by the permutation-sum identities.
struct SumTables {
    n: usize,
    xi: Vec<Q>,
    /// `ξ_j^e` for `e = 0..=N`.
    xi_pow: Vec<Vec<Q>>,
    /// `(1 - ξ_j)^e` for `e = 0..=N`.
    one_minus_pow: Vec<Vec<Q>>,
    /// `1 / (1 - ∏_{j ∈ mask} ξ_j)` for every nonempty subset.
    geometric: Vec<Q>,
}

impl SumTables {
    fn new(xi: &[Q]) -> Result<Self> {
        let n = xi.len();
        let mut product = vec![Q::one(); 1 << n];
        let mut geometric = vec![Q::zero(); 1 << n];
        for mask in 1usize..1 << n {
            let low = mask.trailing_zeros() as usize;
            product[mask] = &product[mask & (mask - 1)] * &xi[low];
            let d = Q::one() - &product[mask];
            if d.is_zero() {
                return Err(Error::Degenerate(format!("a partial product of ξ equals 1 (subset {mask:b})")));
            }
            geometric[mask] = Q::one() / d;
        }
        let powers = |base: &Q| (0..=n as i64).map(|e| pow_int(base, e)).collect::<Vec<_>>();
        Ok(SumTables {
            n,
            xi: xi.to_vec(),
            xi_pow: xi.iter().map(powers).collect(),
            one_minus_pow: xi.iter().map(|v| powers(&(Q::one() - v))).collect(),
            geometric,
        })
    }

    fn one_minus(&self, j: usize) -> &Q {
        &self.one_minus_pow[j - 1][1]
    }

    fn mask(images: &[usize]) -> usize {
        images.iter().fold(0, |m, &j| m | 1 << (j - 1))
    }

    /// Multiplies by `ξ_{σ(2)} ξ_{σ(3)}^2 .. ξ_{σ(N)}^{N-1} / ∏_{k=2}^{N} (1 - ξ_{σ(k)} .. ξ_{σ(N)})`.
    fn forward_kernel(&self, sigma: &Permutation, term: &mut Term) {
        let im = sigma.images();
        for k in 2..=self.n {
            term.mul(&self.xi_pow[im[k - 1] - 1][k - 1]);
            term.mul(&self.geometric[Self::mask(&im[k - 1..])]);
        }
    }

    /// Multiplies by `1 / ∏_{k=1}^{N-1} (ξ_{σ(1)} .. ξ_{σ(k)} - 1)`.
    fn backward_denominators(&self, sigma: &Permutation, term: &mut Term) {
        let im = sigma.images();
        for k in 1..self.n {
            term.mul(&self.geometric[Self::mask(&im[..k])]);
        }
        if self.n.is_multiple_of(2) {
            term.negate();
        }
    }

    /// Multiplies by `(ξ_j / (ξ_j - 1))^e`.
    fn mul_ratio_to_minus_one(&self, j: usize, e: usize, term: &mut Term) {
        term.mul(&self.xi_pow[j - 1][e]);
        term.div(&self.one_minus_pow[j - 1][e]);
        if e % 2 == 1 {
            term.negate();
        }
    }

    fn sum<F: Fn(&Permutation) -> Q>(&self, term: F) -> Result<Q> {
        let mut total = Q::zero();
        for sigma in enumerate_with_cap(self.n, SUM_IDENTITY_MAX_N)? {
            total += term(&sigma);
        }
        Ok(total)
    }

    fn vandermonde(&self) -> Q {
        vandermonde(&self.xi)
    }

    /// `v / ∏_j (s (1 - ξ_j))^e` with `s = ±1`.
    fn over_one_minus_powers(&self, v: Q, e: usize, negate: bool) -> Q {
        let mut t = Term::signed(if negate && (e * self.n) % 2 == 1 { -1 } else { 1 });
        t.mul(&v);
        for j in 1..=self.n {
            t.div(&self.one_minus_pow[j - 1][e]);
        }
        t.finish()
    }
}

fn require_n(point: &RationalPoint, min: usize) -> Result<()> {
    if point.n() < min {
        return Err(Error::Domain(format!("identity needs N ≥ {min}, got {}", point.n())));
    }
    Ok(())
}

/// `Σ_σ [A_σ] ξ_{σ(2)} .. ξ_{σ(N)}^{N-1} / ∏_k (1 - ξ_{σ(k)} .. ξ_{σ(N)})
///   = (1 - ξ_1) ∏_{i<j} (ξ_j - ξ_i)/(1 - ξ_i) ∏_i 1/(1 - ξ_i)`.
pub fn main_identity(point: &RationalPoint) -> Result<IdentityCheck> {
    require_n(point, 2)?;
    let t = SumTables::new(point.components())?;
    let spectral = point.spectral();
    let mut lhs = Q::zero();
    for sigma in enumerate_with_cap(point.n(), SUM_IDENTITY_MAX_N)? {
        let mut term = Term::signed(1);
        term.mul(&amplitude_center(&sigma, &spectral)?);
        t.forward_kernel(&sigma, &mut term);
        lhs += term.finish();
    }
    let mut rhs = Term::signed(1);
    rhs.mul(t.one_minus(1));
    rhs.mul(&t.vandermonde());
    for j in 1..=t.n {
        rhs.div(&t.one_minus_pow[j - 1][t.n - j + 1]);
    }
    Ok(IdentityCheck { lhs, rhs: rhs.finish() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalentForm {
    /// `Σ_σ sgn σ ∏_{i≥3} (1 - ξ_{σ(i)})^{-(i-2)} · kernel = ∏ (1 - ξ_i)^{-(N-1)} ∏_{i<j} (ξ_j - ξ_i)`.
    PowerForm,
    /// The same after `ξ_i → 1/ξ_{N-i+1}`, with `(ξ - 1)` factors.
    InvertedForm,
}

pub fn equivalent_identity(point: &RationalPoint, form: EquivalentForm) -> Result<IdentityCheck> {
    require_n(point, 2)?;
    let t = SumTables::new(point.components())?;
    let n = t.n;
    match form {
        EquivalentForm::PowerForm => {
            let lhs = t.sum(|sigma| {
                let im = sigma.images();
                let mut term = Term::signed(sigma.sign());
                t.forward_kernel(sigma, &mut term);
                for i in 3..=n {
                    term.div(&t.one_minus_pow[im[i - 1] - 1][i - 2]);
                }
                term.finish()
            })?;
            Ok(IdentityCheck { lhs, rhs: t.over_one_minus_powers(t.vandermonde(), n - 1, false) })
        }
        EquivalentForm::InvertedForm => {
            let lhs = t.sum(|sigma| {
                let im = sigma.images();
                let mut term = Term::signed(sigma.sign());
                t.backward_denominators(sigma, &mut term);
                for i in 1..=n.saturating_sub(2) {
                    t.mul_ratio_to_minus_one(im[i - 1], n - 1 - i, &mut term);
                }
                term.finish()
            })?;
            Ok(IdentityCheck { lhs, rhs: t.over_one_minus_powers(t.vandermonde(), n - 1, true) })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TasepForm {
    /// `Σ_σ A_σ · kernel = (1 - ξ_1..ξ_N) ∏ 1/(1 - ξ_i) ∏_{i<j} (ξ_j - ξ_i)/(1 - ξ_i)` with
    /// `A_σ = sgn σ ∏_{i≥2} ((1 - ξ_i)/(1 - ξ_{σ(i)}))^{i-1}`.
    Amplitude,
    /// `Σ_σ sgn σ ∏_{i≥2} (1 - ξ_{σ(i)})^{-(i-1)} · kernel = (1 - ξ_1..ξ_N) ∏ (1 - ξ_i)^{-N} ∏_{i<j} (ξ_j - ξ_i)`.
    Prefactor,
    /// The prefactor form after `ξ_i → 1/ξ_{N-i+1}`.
    Inverted,
}

pub fn tasep_identity(point: &RationalPoint, form: TasepForm) -> Result<IdentityCheck> {
    require_n(point, 2)?;
    let t = SumTables::new(point.components())?;
    let n = t.n;
    let full: Q = t.xi.iter().fold(Q::one(), |a, b| a * b);
    match form {
        TasepForm::Amplitude => {
            let lhs = t.sum(|sigma| {
                let im = sigma.images();
                let mut term = Term::signed(sigma.sign());
                for i in 2..=n {
                    term.mul(&t.one_minus_pow[i - 1][i - 1]);
                    term.div(&t.one_minus_pow[im[i - 1] - 1][i - 1]);
                }
                t.forward_kernel(sigma, &mut term);
                term.finish()
            })?;
            let mut rhs = Term::signed(1);
            rhs.mul(&(Q::one() - &full));
            rhs.mul(&t.vandermonde());
            for j in 1..=n {
                rhs.div(&t.one_minus_pow[j - 1][n - j + 1]);
            }
            Ok(IdentityCheck { lhs, rhs: rhs.finish() })
        }
        TasepForm::Prefactor => {
            let lhs = t.sum(|sigma| {
                let im = sigma.images();
                let mut term = Term::signed(sigma.sign());
                t.forward_kernel(sigma, &mut term);
                for i in 2..=n {
                    term.div(&t.one_minus_pow[im[i - 1] - 1][i - 1]);
                }
                term.finish()
            })?;
            let v = (Q::one() - &full) * t.vandermonde();
            Ok(IdentityCheck { lhs, rhs: t.over_one_minus_powers(v, n, false) })
        }
        TasepForm::Inverted => {
            let lhs = t.sum(|sigma| {
                let im = sigma.images();
                let mut term = Term::signed(sigma.sign());
                t.backward_denominators(sigma, &mut term);
                for i in 1..n {
                    t.mul_ratio_to_minus_one(im[i - 1], n - i, &mut term);
                }
                term.finish()
            })?;
            let v = (&full - Q::one()) * t.vandermonde();
            Ok(IdentityCheck { lhs, rhs: t.over_one_minus_powers(v, n, true) })
        }
    }
}

/// `∏_{i≥3} (1 - ξ_i)^{i-2}`, the factor turning the power form into the main identity.
fn power_form_factor(point: &RationalPoint) -> Q {
    (3..=point.n()).fold(Q::one(), |acc, i| acc * pow_int(&(Q::one() - point.xi(i)), (i - 2) as i64))
}

/// Both sides of the main identity equal those of the power form times
/// `∏_{i≥3} (1 - ξ_i)^{i-2}`.
pub fn main_matches_power_form(main: &IdentityCheck, power: &IdentityCheck, point: &RationalPoint) -> bool {
    let factor = power_form_factor(point);
    main.lhs == &power.lhs * &factor && main.rhs == &power.rhs * &factor
}

/// Mechanical check of the identity chain: the main identity equals the power
/// form times `∏_{i≥3} (1 - ξ_i)^{i-2}` on both sides, and the power form at
/// `ξ' = (1/ξ_N, .., 1/ξ_1)` equals the inverted form at `ξ` on both sides.
/// The single-species pair is checked the same way.
pub fn identity_chain(point: &RationalPoint) -> Result<bool> {
    require_n(point, 2)?;
    let main = main_identity(point)?;
    let power = equivalent_identity(point, EquivalentForm::PowerForm)?;
    let swapped = point.reversed_inverse();
    let power_swapped = equivalent_identity(&swapped, EquivalentForm::PowerForm)?;
    let inverted = equivalent_identity(point, EquivalentForm::InvertedForm)?;
    let tasep_swapped = tasep_identity(&swapped, TasepForm::Prefactor)?;
    let tasep_inverted = tasep_identity(point, TasepForm::Inverted)?;
    Ok(main_matches_power_form(&main, &power, point)
        && power_swapped == inverted
        && tasep_swapped == tasep_inverted)
}

/// `Σ_α (-1)^{N+α} (ξ_α - 1)^{N-1} ∏_{i<j; i,j≠α} (ξ_j - ξ_i) = ∏_{i<j} (ξ_j - ξ_i)`.
pub fn vandermonde_cofactor(point: &RationalPoint) -> Result<IdentityCheck> {
    require_n(point, 2)?;
    let n = point.n();
    let xi = point.components();
    let mut lhs = Q::zero();
    for alpha in 1..=n {
        let rest: Vec<Q> = xi.iter().enumerate().filter(|(i, _)| i + 1 != alpha).map(|(_, v)| v.clone()).collect();
        let sign = if (n + alpha).is_multiple_of(2) { Q::one() } else { -Q::one() };
        lhs += sign * pow_int(&(&xi[alpha - 1] - Q::one()), (n - 1) as i64) * vandermonde(&rest);
    }
    Ok(IdentityCheck { lhs, rhs: vandermonde(xi) })
}

/// Determinant of the power matrix with columns `ξ^{N-1+l}, ξ^{N-2+k_2}, .., ξ^{k_N}`
/// and the value it collapses to: zero if some `k_i ≠ 0` with `i ≥ 3`,
/// otherwise `h_l ∏_{i<j} (ξ_i - ξ_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DetCollapse {
    pub determinant: Q,
    pub expected: Q,
    pub vanishes: bool,
}

impl DetCollapse {
    pub fn holds(&self) -> bool {
        self.determinant == self.expected
    }
}

/// `k` lists `k_2, .., k_N` with `0 ≤ k_i ≤ i - 2`.
pub fn det_collapse(point: &RationalPoint, l: usize, k: &[usize]) -> Result<DetCollapse> {
    let n = point.n();
    if k.len() + 1 != n {
        return Err(Error::Domain(format!("expected {} exponents k_2..k_N, got {}", n - 1, k.len())));
    }
    if let Some((i, &ki)) = k.iter().enumerate().find(|(i, &ki)| ki > *i) {
        return Err(Error::Domain(format!("k_{} = {ki} exceeds {}", i + 2, i)));
    }
    let xi = point.components();
    let column_power = |c: usize| if c == 1 { n - 1 + l } else { n - c + k[c - 2] };
    let rows = xi
        .iter()
        .map(|x| (1..=n).map(|c| pow_int(x, column_power(c) as i64)).collect())
        .collect();
    let determinant = crate::scalar::Matrix::from_rows(rows).determinant();
    let vanishes = k.iter().skip(1).any(|&v| v != 0);
    let expected = if vanishes {
        Q::zero()
    } else {
        let mut descending = Q::one();
        for i in 0..n {
            for j in i + 1..n {
                descending *= &xi[i] - &xi[j];
            }
        }
        complete_symmetric(xi, l) * descending
    };
    Ok(DetCollapse { determinant, expected, vanishes })
}

/// The closed form of `[A_σ]` against the `21..1` diagonal entry of the matrix product.
pub fn closed_form_vs_product(point: &RationalPoint, sigma: &Permutation) -> Result<IdentityCheck> {
    let spectral = point.spectral();
    let c = center_index(point.n());
    let product = amplitude_column(sigma, &spectral, c)?.swap_remove(c);
    Ok(IdentityCheck { lhs: amplitude_center(sigma, &spectral)?, rhs: product })
}

pub fn braid_relations(point: &RationalPoint) -> Result<BraidReport> {
    braid_check(&point.spectral(), 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityKind {
    Main,
    EquivA,
    EquivB,
    Tasep,
    Vandermonde,
    DetCollapse,
    Amplitude,
    Braid,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 8] = [
        IdentityKind::Main,
        IdentityKind::EquivA,
        IdentityKind::EquivB,
        IdentityKind::Tasep,
        IdentityKind::Vandermonde,
        IdentityKind::DetCollapse,
        IdentityKind::Amplitude,
        IdentityKind::Braid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityKind::Main => "main",
            IdentityKind::EquivA => "equivA",
            IdentityKind::EquivB => "equivB",
            IdentityKind::Tasep => "tasep",
            IdentityKind::Vandermonde => "vandermonde",
            IdentityKind::DetCollapse => "detcollapse",
            IdentityKind::Amplitude => "amplitude",
            IdentityKind::Braid => "braid",
        }
    }

    pub fn max_n(&self) -> usize {
        match self {
            IdentityKind::Amplitude | IdentityKind::Braid => MATRIX_IDENTITY_MAX_N,
            _ => SUM_IDENTITY_MAX_N,
        }
    }

    /// Total degree bound of the polynomial identity after clearing denominators.
    pub fn degree_bound(&self, n: usize) -> u64 {
        let n = n as u64;
        match self {
            IdentityKind::Main | IdentityKind::EquivA | IdentityKind::EquivB | IdentityKind::Tasep => {
                n * (1 << (n - 1)) + n * n + n * (n - 1) + n
            }
            IdentityKind::Vandermonde => n * (n - 1) / 2 + n,
            // columns of degree ≤ N-1+l plus N-c+k_c with l, k_c ≤ 3, N - 2
            IdentityKind::DetCollapse => n * (n - 1) / 2 + 3 + (n - 1) * (n - 2) / 2,
            IdentityKind::Amplitude => 2 * n * (n - 1),
            IdentityKind::Braid => 12,
        }
    }
}

impl FromStr for IdentityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown identity {s:?}")))
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Largest `l` drawn for the collapse check.
const MAX_RANDOM_L: usize = 3;
/// Permutations checked per point for the closed form of `[A_σ]`.
const AMPLITUDE_SAMPLES: usize = 10;

/// Fixed choices for the collapse check; unset entries are drawn at random.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckOptions {
    pub l: Option<usize>,
    pub k: Option<Vec<usize>>,
}

/// Checks one identity at one point; random auxiliary choices come from `rng`.
pub fn check_at<R: Rng>(kind: IdentityKind, point: &RationalPoint, rng: &mut R, options: &CheckOptions) -> Result<bool> {
    let n = point.n();
    Ok(match kind {
        IdentityKind::Main => main_identity(point)?.holds(),
        IdentityKind::EquivA => {
            let power = equivalent_identity(point, EquivalentForm::PowerForm)?;
            power.holds() && main_matches_power_form(&main_identity(point)?, &power, point)
        }
        IdentityKind::EquivB => {
            let inverted = equivalent_identity(point, EquivalentForm::InvertedForm)?;
            inverted.holds()
                && equivalent_identity(&point.reversed_inverse(), EquivalentForm::PowerForm)? == inverted
        }
        IdentityKind::Tasep => {
            let inverted = tasep_identity(point, TasepForm::Inverted)?;
            tasep_identity(point, TasepForm::Amplitude)?.holds()
                && tasep_identity(point, TasepForm::Prefactor)?.holds()
                && inverted.holds()
                && tasep_identity(&point.reversed_inverse(), TasepForm::Prefactor)? == inverted
        }
        IdentityKind::Vandermonde => vandermonde_cofactor(point)?.holds(),
        IdentityKind::DetCollapse => {
            let l = options.l.unwrap_or_else(|| rng.random_range(0..=MAX_RANDOM_L));
            match &options.k {
                Some(k) => det_collapse(point, l, k)?.holds(),
                None => {
                    let zero = vec![0; n - 1];
                    let k: Vec<usize> = (0..n - 1).map(|i| rng.random_range(0..=i)).collect();
                    det_collapse(point, l, &zero)?.holds() && det_collapse(point, l, &k)?.holds()
                }
            }
        }
        IdentityKind::Amplitude => {
            let perms = enumerate_with_cap(n, MATRIX_IDENTITY_MAX_N)?;
            let picks: Vec<&Permutation> = if perms.len() <= AMPLITUDE_SAMPLES {
                perms.iter().collect()
            } else {
                (0..AMPLITUDE_SAMPLES).map(|_| &perms[rng.random_range(0..perms.len())]).collect()
            };
            picks
                .into_iter()
                .map(|s| closed_form_vs_product(point, s).map(|c| c.holds()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .all(|b| b)
        }
        IdentityKind::Braid => braid_relations(point)?.holds(),
    })
}

/// One report line: an identity at one `N` over many points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteLine {
    pub identity: String,
    pub n: usize,
    pub points: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub skipped: bool,
    pub pass: bool,
    pub degree_bound: u64,
    /// Per-point probability that a false identity still passes: `d μ`.
    pub false_pass_bound: f64,
}

fn point_rng(seed: u64, kind: IdentityKind, n: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << 56) | ((n as u64) << 40) | index as u64);
    rng
}

/// Runs `kind` at `points` random points for one `N`. Points are drawn from
/// independent streams of `seed`, so the report does not depend on
/// scheduling.
pub fn run_identity(kind: IdentityKind, n: usize, points: usize, seed: u64, options: &CheckOptions) -> SuiteLine {
    let degree = if n >= 2 { kind.degree_bound(n) } else { 0 };
    let mut line = SuiteLine {
        identity: kind.name().to_string(),
        n,
        points,
        passed: 0,
        failed: 0,
        errors: 0,
        skipped: false,
        pass: true,
        degree_bound: degree,
        false_pass_bound: degree as f64 * point_mass(),
    };
    if n < 2 || n > kind.max_n() {
        line.skipped = true;
        return line;
    }
    let outcomes: Vec<Result<bool>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut rng = point_rng(seed, kind, n, i);
            let point = sample_point(&mut rng, n);
            check_at(kind, &point, &mut rng, options)
        })
        .collect();
    for o in outcomes {
        match o {
            Ok(true) => line.passed += 1,
            Ok(false) => line.failed += 1,
            Err(_) => line.errors += 1,
        }
    }
    line.pass = line.failed == 0 && line.errors == 0;
    line
}

pub fn run_suite(
    kinds: &[IdentityKind],
    ns: impl IntoIterator<Item = usize> + Clone,
    points: usize,
    seed: u64,
    options: &CheckOptions,
) -> Vec<SuiteLine> {
    let mut lines = Vec::new();
    for &kind in kinds {
        for n in ns.clone() {
            lines.push(run_identity(kind, n, points, seed, options));
        }
    }
    lines
}

/// One identity at a user-given point, with both sides where they exist.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub identity: String,
    pub point: String,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    pub pass: bool,
}

pub fn evaluate_at(kind: IdentityKind, point: &RationalPoint, options: &CheckOptions) -> Result<PointReport> {
    let n = point.n();
    if n > kind.max_n() {
        return Err(Error::Size { n, cap: kind.max_n() });
    }
    let sides = |c: IdentityCheck| (Some(c.lhs.to_string()), Some(c.rhs.to_string()), c.holds());
    let (lhs, rhs, pass) = match kind {
        IdentityKind::Main => sides(main_identity(point)?),
        IdentityKind::EquivA => {
            let (l, r, ok) = sides(equivalent_identity(point, EquivalentForm::PowerForm)?);
            (l, r, ok && identity_chain(point)?)
        }
        IdentityKind::EquivB => sides(equivalent_identity(point, EquivalentForm::InvertedForm)?),
        IdentityKind::Tasep => {
            let (l, r, ok) = sides(tasep_identity(point, TasepForm::Amplitude)?);
            let rest = tasep_identity(point, TasepForm::Prefactor)?.holds()
                && tasep_identity(point, TasepForm::Inverted)?.holds();
            (l, r, ok && rest)
        }
        IdentityKind::Vandermonde => sides(vandermonde_cofactor(point)?),
        IdentityKind::DetCollapse => {
            let k = options.k.clone().unwrap_or_else(|| vec![0; n.saturating_sub(1)]);
            let c = det_collapse(point, options.l.unwrap_or(0), &k)?;
            (Some(c.determinant.to_string()), Some(c.expected.to_string()), c.holds())
        }
        IdentityKind::Amplitude => {
            let mut ok = true;
            for sigma in enumerate_with_cap(n, MATRIX_IDENTITY_MAX_N)? {
                ok &= closed_form_vs_product(point, &sigma)?.holds();
            }
            (None, None, ok)
        }
        IdentityKind::Braid => (None, None, braid_relations(point)?.holds()),
    };
    Ok(PointReport { identity: kind.name().to_string(), point: point.to_string(), lhs, rhs, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        rational(n, d)
    }

    fn pt(v: &[(i64, i64)]) -> RationalPoint {
        RationalPoint::new(v.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    #[test]
    fn main_identity_two_particles() {
        let c = main_identity(&pt(&[(1, 2), (1, 3)])).unwrap();
        assert_eq!(c.lhs, q(-1, 2));
        assert_eq!(c.rhs, q(-1, 2));
    }

    #[test]
    fn main_identity_three_particles() {
        assert!(main_identity(&pt(&[(1, 2), (1, 3), (1, 5)])).unwrap().holds());
    }

    #[test]
    fn equivalent_forms_and_chain() {
        let p = pt(&[(1, 2), (1, 3)]);
        assert!(equivalent_identity(&p, EquivalentForm::PowerForm).unwrap().holds());
        assert!(equivalent_identity(&p, EquivalentForm::InvertedForm).unwrap().holds());
        assert!(identity_chain(&p).unwrap());
        let p4 = pt(&[(2, 7), (5, 11), (1, 3), (3, 4)]);
        assert!(identity_chain(&p4).unwrap());
    }

    #[test]
    fn tasep_forms() {
        let p = pt(&[(1, 2), (1, 3)]);
        for f in [TasepForm::Amplitude, TasepForm::Prefactor, TasepForm::Inverted] {
            assert!(tasep_identity(&p, f).unwrap().holds(), "{f:?}");
        }
        let c = tasep_identity(&pt(&[(3, 1), (2, 1)]), TasepForm::Inverted).unwrap();
        assert_eq!(c.lhs, q(-5, 4));
        assert!(c.holds());
    }

    #[test]
    fn cofactor_and_collapse() {
        assert!(vandermonde_cofactor(&pt(&[(1, 2), (1, 3), (1, 5)])).unwrap().holds());
        let p = pt(&[(1, 2), (1, 3), (1, 5)]);
        let b = det_collapse(&p, 0, &[0, 0]).unwrap();
        let expected = (q(1, 2) - q(1, 3)) * (q(1, 2) - q(1, 5)) * (q(1, 3) - q(1, 5));
        assert_eq!(b.determinant, expected);
        let a = det_collapse(&p, 2, &[0, 1]).unwrap();
        assert!(a.vanishes && a.determinant.is_zero());
        let two = pt(&[(1, 2), (1, 3)]);
        let c = det_collapse(&two, 1, &[0]).unwrap();
        assert_eq!(c.determinant, (q(1, 2) + q(1, 3)) * (q(1, 2) - q(1, 3)));
        assert!(det_collapse(&p, 0, &[1, 0]).is_err());
        assert!(det_collapse(&p, 0, &[0]).is_err());
    }

    #[test]
    fn degenerate_point_reported() {
        let p = pt(&[(2, 1), (1, 2), (1, 3)]);
        assert!(matches!(main_identity(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn parse_points() {
        let p = RationalPoint::parse("1/2, 1/3,3").unwrap();
        assert_eq!(p.to_string(), "1/2,1/3,3");
        assert!(!p.in_unit_interval());
        assert!(RationalPoint::parse("1/2,1/2").is_err());
        assert!(RationalPoint::parse("1").is_err());
        assert!(RationalPoint::parse("1/0").is_err());
        assert!(RationalPoint::parse("a/2").is_err());
    }

    #[test]
    fn sampler_is_in_range_and_reproducible() {
        assert_eq!(sampling_primes().len(), 73);
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p = sample_point(&mut a, 5);
            assert!(p.in_unit_interval());
            assert_eq!(p, sample_point(&mut b, 5));
        }
    }

    #[test]
    fn small_suite_passes() {
        for kind in IdentityKind::ALL {
            let line = run_identity(kind, 3, 5, 1, &CheckOptions::default());
            assert!(line.pass && line.passed == 5, "{line:?}");
        }
        assert!(run_identity(IdentityKind::Braid, 6, 5, 1, &CheckOptions::default()).skipped);
        let fixed = CheckOptions { l: Some(2), k: Some(vec![0, 1]) };
        assert!(run_identity(IdentityKind::DetCollapse, 3, 5, 1, &fixed).pass);
        let wrong = CheckOptions { l: None, k: Some(vec![0]) };
        assert_eq!(run_identity(IdentityKind::DetCollapse, 3, 5, 1, &wrong).errors, 5);
    }

    #[test]
    fn point_reports() {
        let p = RationalPoint::parse("1/2,1/3").unwrap();
        let r = evaluate_at(IdentityKind::Main, &p, &CheckOptions::default()).unwrap();
        assert_eq!((r.lhs.as_deref(), r.rhs.as_deref(), r.pass), (Some("-1/2"), Some("-1/2"), true));
        for kind in IdentityKind::ALL {
            assert!(evaluate_at(kind, &p, &CheckOptions::default()).unwrap().pass, "{kind}");
        }
    }

    #[test]
    fn identity_names_round_trip() {
        for kind in IdentityKind::ALL {
            assert_eq!(kind.name().parse::<IdentityKind>().unwrap(), kind);
        }
        assert!("nope".parse::<IdentityKind>().is_err());
    }
}
