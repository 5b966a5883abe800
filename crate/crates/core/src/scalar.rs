//! Scalar fields and small dense matrices.
//!
//! The structural statements about amplitude matrices are exact, so every
//! matrix routine here is generic over [`Scalar`]: `BigRational` for exact
//! checks, `f64` / `Complex64` where contour integrals force floating point.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether `==` is exact equality of field elements.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    /// Absolute value (modulus) as a float, used for tolerances and pivoting.
    fn magnitude(&self) -> f64;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// `x^e` for any integer exponent. Negative exponents invert `x`.
pub fn pow_int<S: Scalar>(x: &S, e: i64) -> S {
    if e < 0 {
        return S::one() / pow_int(x, -e);
    }
    let mut base = x.clone();
    let mut acc = S::one();
    let mut e = e as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base.clone();
        }
        e >>= 1;
        if e > 0 {
            base = base.clone() * base;
        }
    }
    acc
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Approximate equality; exact fields ignore `tol`.
pub fn scalar_eq<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    if S::EXACT {
        a == b
    } else {
        (a.clone() - b.clone()).magnitude() <= tol
    }
}

/// Square dense matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![S::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Matrix { dim, data: rows.into_iter().flatten().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 0-based entry access.
    pub fn get(&self, row: usize, col: usize) -> &S {
        &self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: S) {
        self.data[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[S] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Vec<S> {
        (0..self.dim).map(|r| self.get(r, col).clone()).collect()
    }

    pub fn diagonal(&self) -> Vec<S> {
        (0..self.dim).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn mul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Matrix::<S>::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * n + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: &S) -> Matrix<S> {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v.clone() * factor.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.dim, other.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix<S>) -> Matrix<S> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix<S>, tol: f64) -> bool {
        self.dim == other.dim
            && self.data.iter().zip(&other.data).all(|(a, b)| scalar_eq(a, b, tol))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.dim).all(|r| (0..r).all(|c| self.get(r, c).is_zero()))
    }

    fn pivot_row(&self, col: usize, from: usize) -> Option<usize> {
        if S::EXACT {
            (from..self.dim).find(|&r| !self.get(r, col).is_zero())
        } else {
            (from..self.dim)
                .filter(|&r| !self.get(r, col).is_zero())
                .max_by(|&a, &b| {
                    self.get(a, col).magnitude().total_cmp(&self.get(b, col).magnitude())
                })
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.dim {
            self.data.swap(a * self.dim + c, b * self.dim + c);
        }
    }

    /// Determinant by Gaussian elimination (partial pivoting for floats).
    pub fn determinant(&self) -> S {
        let n = self.dim;
        let mut m = self.clone();
        let mut det = S::one();
        for col in 0..n {
            let Some(p) = m.pivot_row(col, col) else {
                return S::zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            det = det * pivot.clone();
            for r in col + 1..n {
                let f = m.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                let f = f / pivot.clone();
                for c in col..n {
                    let v = m.get(r, c).clone() - f.clone() * m.get(col, c).clone();
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix<S>> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Matrix::<S>::identity(n);
        for col in 0..n {
            let p = a.pivot_row(col, col)?;
            a.swap_rows(p, col);
            inv.swap_rows(p, col);
            let pivot = a.get(col, col).clone();
            for c in 0..n {
                a.set(col, c, a.get(col, c).clone() / pivot.clone());
                inv.set(col, c, inv.get(col, c).clone() / pivot.clone());
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let va = a.get(r, c).clone() - f.clone() * a.get(col, c).clone();
                    a.set(r, c, va);
                    let vi = inv.get(r, c).clone() - f.clone() * inv.get(col, c).clone();
                    inv.set(r, c, vi);
                }
            }
        }
        Some(inv)
    }
}

/// Compensated (Kahan-Babuska-Neumaier) accumulator for alternating sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Pairwise summation; the reduction tree depends only on the slice length.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::zero(),
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_int_handles_negative_exponents() {
        let x = rational(2, 3);
        assert_eq!(pow_int(&x, 3), rational(8, 27));
        assert_eq!(pow_int(&x, -2), rational(9, 4));
        assert_eq!(pow_int(&x, 0), rational(1, 1));
    }

    #[test]
    fn exact_determinant_and_inverse() {
        let m = Matrix::from_rows(vec![
            vec![rational(2, 1), rational(1, 1), rational(0, 1)],
            vec![rational(1, 1), rational(3, 1), rational(1, 1)],
            vec![rational(0, 1), rational(1, 1), rational(4, 1)],
        ]);
        // 2(12-1) - 1(4-0) = 18
        assert_eq!(m.determinant(), rational(18, 1));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(3));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = Matrix::from_rows(vec![
            vec![rational(1, 1), rational(2, 1)],
            vec![rational(2, 1), rational(4, 1)],
        ]);
        assert!(m.determinant().is_zero());
        assert!(m.inverse().is_none());
    }

    #[test]
    fn float_determinant_pivots() {
        let m = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(m.determinant(), -1.0);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..10 {
            k.add(1e-17);
        }
        k.add(-1.0);
        assert!((k.value() - 1e-16).abs() < 1e-30);
    }
}
