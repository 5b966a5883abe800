//! Amplitude entries as Laurent polynomials in `ξ_j` and `u_j = 1 - ξ_j`.
//!
//! Every entry of `S_βα` is a signed monomial in these variables
//! (`-u_β u_α^{-1}`, `(ξ_β - ξ_α) u_α^{-1}` or `-1`), so each entry of `A_σ`
//! expands into finitely many integer-weighted monomials. Multiplied by the
//! plane-wave factors, every monomial separates into one-variable contour
//! integrals of the form `∮ ξ^k (1 - ξ)^e e^{(1/ξ - 1)t}`.

use std::collections::BTreeMap;

use crate::combinatorics::Permutation;
use crate::error::{Error, Result};
use crate::scalar::{pow_int, Scalar};

use super::SpectralPoint;

/// Exponents `[ξ_1 .. ξ_N, u_1 .. u_N]`.
pub type Monomial = Vec<i32>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    n: usize,
    terms: BTreeMap<Monomial, i64>,
}

impl LaurentPoly {
    pub fn zero(n: usize) -> Self {
        LaurentPoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: i64) -> Self {
        let mut p = Self::zero(n);
        if c != 0 {
            p.terms.insert(vec![0; 2 * n], c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, mono: Monomial, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    fn add_assign(&mut self, other: &LaurentPoly) {
        for (m, c) in other.terms() {
            self.add_term(m.clone(), c);
        }
    }

    fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.n);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// Evaluate at a point; used to cross-check against the numeric product.
    pub fn eval<S: Scalar>(&self, point: &SpectralPoint<S>) -> S {
        let n = self.n;
        self.terms().fold(S::zero(), |acc, (m, c)| {
            let mut v = S::from_i64(c);
            for j in 0..n {
                let xi = point.xi(j + 1);
                v = v * pow_int(xi, m[j] as i64) * pow_int(&(S::one() - xi.clone()), m[n + j] as i64);
            }
            acc + v
        })
    }
}

fn monomial(n: usize, xi: &[(usize, i32)], u: &[(usize, i32)]) -> Monomial {
    let mut m = vec![0; 2 * n];
    for &(j, e) in xi {
        m[j - 1] += e;
    }
    for &(j, e) in u {
        m[n + j - 1] += e;
    }
    m
}

/// Local 4×4 entries of `S_βα` as Laurent polynomials.
fn local_s(n: usize, alpha: usize, beta: usize) -> [[LaurentPoly; 4]; 4] {
    let mut s: [[LaurentPoly; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| LaurentPoly::zero(n)));
    let mut diag = LaurentPoly::zero(n);
    diag.add_term(monomial(n, &[], &[(beta, 1), (alpha, -1)]), -1);
    let mut off = LaurentPoly::zero(n);
    off.add_term(monomial(n, &[(beta, 1)], &[(alpha, -1)]), 1);
    off.add_term(monomial(n, &[(alpha, 1)], &[(alpha, -1)]), -1);
    s[0][0] = diag.clone();
    s[1][1] = diag.clone();
    s[3][3] = diag;
    s[1][2] = off;
    s[2][2] = LaurentPoly::constant(n, -1);
    s
}

/// Column `col` of `A_σ` with symbolic entries.
pub fn amplitude_column_symbolic(sigma: &Permutation, col: usize) -> Result<Vec<LaurentPoly>> {
    let n = sigma.len();
    let dim = 1usize << n;
    if col >= dim {
        return Err(Error::IndexOutOfRange { index: col + 1, max: dim });
    }
    let mut v: Vec<LaurentPoly> = (0..dim).map(|_| LaurentPoly::zero(n)).collect();
    v[col] = LaurentPoly::constant(n, 1);
    let mut images: Vec<usize> = (1..=n).collect();
    for a in sigma.adjacent_decomposition() {
        let (alpha, beta) = (images[a - 1], images[a]);
        images.swap(a - 1, a);
        let s = local_s(n, alpha, beta);
        let shift = n - a - 1;
        let mut next: Vec<LaurentPoly> = (0..dim).map(|_| LaurentPoly::zero(n)).collect();
        for (r, out) in next.iter_mut().enumerate() {
            let p = (r >> shift) & 3;
            let base = r & !(3 << shift);
            for (q, entry) in s[p].iter().enumerate() {
                if entry.is_zero() {
                    continue;
                }
                let src = &v[base | (q << shift)];
                if src.is_zero() {
                    continue;
                }
                out.add_assign(&entry.mul(src));
            }
        }
        v = next;
    }
    Ok(v)
}

/// Entry `(row, col)` of `A_σ` with symbolic entries.
pub fn amplitude_entry_symbolic(sigma: &Permutation, row: usize, col: usize) -> Result<LaurentPoly> {
    let mut column = amplitude_column_symbolic(sigma, col)?;
    if row >= column.len() {
        return Err(Error::IndexOutOfRange { index: row + 1, max: column.len() });
    }
    Ok(column.swap_remove(row))
}
