//! Scattering matrices, their tensor embeddings and the Bethe amplitudes `A_σ`.
//!
//! Species words index rows and columns in reverse lexicographic order: the
//! word `π_1 .. π_N` sits at 0-based index `Σ (π_p - 1) 2^(N - p)`, so for two
//! particles the order is `11, 12, 21, 22` and the word `21..1` is at
//! `2^(N-1)`. An operator on the adjacent pair `(l, l + 1)` acts on the two
//! bits at shifts `N - l` and `N - l - 1`, which is `I^(l-1) ⊗ M ⊗ I^(N-l-1)`.

pub mod symbolic;

use crate::combinatorics::Permutation;
use crate::error::{Error, Result};
use crate::scalar::{pow_int, Matrix, Scalar};

/// 0-based row/column of the species word `21..1`.
pub fn center_index(n: usize) -> usize {
    1 << (n - 1)
}

/// Row/column index of a species word over `{1, 2}`.
pub fn word_index(species: &[u8]) -> usize {
    species.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s == 2))
}

/// Spectral parameters `ξ_1 .. ξ_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPoint<S> {
    xi: Vec<S>,
}

impl<S: Scalar> SpectralPoint<S> {
    /// Validated point: nonzero, never 1, pairwise distinct.
    pub fn new(xi: Vec<S>) -> Result<Self> {
        let point = Self::on_contour(xi)?;
        for i in 0..point.xi.len() {
            for j in i + 1..point.xi.len() {
                if point.xi[i] == point.xi[j] {
                    return Err(Error::InvalidPoint(format!(
                        "components {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(point)
    }

    /// Quadrature nodes may repeat a value across variables; only the
    /// singularities at 0 and 1 are excluded.
    pub fn on_contour(xi: Vec<S>) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::InvalidPoint("no components".into()));
        }
        for (i, v) in xi.iter().enumerate() {
            if v.is_zero() {
                return Err(Error::InvalidPoint(format!("component {} is zero", i + 1)));
            }
            if *v == S::one() {
                return Err(Error::Pole(format!("component {} equals 1", i + 1)));
            }
        }
        Ok(SpectralPoint { xi })
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    /// `ξ_j`, 1-based.
    pub fn xi(&self, j: usize) -> &S {
        &self.xi[j - 1]
    }

    pub fn components(&self) -> &[S] {
        &self.xi
    }

    /// `ε = Σ (1/ξ_i - 1)`.
    pub fn energy(&self) -> S {
        self.xi
            .iter()
            .fold(S::zero(), |acc, x| acc + S::one() / x.clone() - S::one())
    }
}

/// The 4×4 two-particle exchange matrix `S_βα` (rows/cols `11, 12, 21, 22`).
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringMatrix<S> {
    entries: [[S; 4]; 4],
}

impl<S: Scalar> ScatteringMatrix<S> {
    pub fn entry(&self, row: usize, col: usize) -> &S {
        &self.entries[row][col]
    }

    pub fn entries(&self) -> &[[S; 4]; 4] {
        &self.entries
    }

    /// The scalar `S_βα = -(1 - ξ_β)/(1 - ξ_α)` repeated on the diagonal.
    pub fn scalar(&self) -> &S {
        &self.entries[0][0]
    }

    pub fn to_matrix(&self) -> Matrix<S> {
        Matrix::from_rows(self.entries.iter().map(|r| r.to_vec()).collect())
    }
}

/// `S_βα` built from `(ξ_α, ξ_β)`: the amplitude gained when the spectral
/// parameters `α` (left) and `β` (right) are exchanged.
pub fn s_matrix<S: Scalar>(xi_alpha: &S, xi_beta: &S) -> Result<ScatteringMatrix<S>> {
    let denom = S::one() - xi_alpha.clone();
    if denom.is_zero() {
        return Err(Error::Pole("ξ_α = 1 in scattering matrix".into()));
    }
    let s = -((S::one() - xi_beta.clone()) / denom.clone());
    let off = (xi_beta.clone() - xi_alpha.clone()) / denom;
    let mut entries: [[S; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
    entries[0][0] = s.clone();
    entries[1][1] = s.clone();
    entries[1][2] = off;
    entries[2][2] = -S::one();
    entries[3][3] = s;
    Ok(ScatteringMatrix { entries })
}

/// The boundary matrix `B` with `U(x, x) = B U(x, x + 1)`.
pub fn boundary_matrix<S: Scalar>() -> [[S; 4]; 4] {
    let mut b: [[S; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
    b[0][0] = S::one();
    b[1][1] = S::one();
    b[1][2] = S::one();
    b[3][3] = S::one();
    b
}

/// A 4×4 block acting on the adjacent pair `(slot, slot + 1)` of `n` sites,
/// kept in factored form; it has at most two nonzeros per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotOperator<S> {
    slot: usize,
    n: usize,
    local: [[S; 4]; 4],
}

impl<S: Scalar> SlotOperator<S> {
    pub fn new(slot: usize, n: usize, local: [[S; 4]; 4]) -> Result<Self> {
        if n < 2 || slot == 0 || slot >= n {
            return Err(Error::IndexOutOfRange { index: slot, max: n.saturating_sub(1) });
        }
        Ok(SlotOperator { slot, n, local })
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    fn shift(&self) -> usize {
        self.n - self.slot - 1
    }

    /// Nonzero `(col, value)` pairs of a row.
    fn row_entries(&self, row: usize) -> impl Iterator<Item = (usize, &S)> + '_ {
        let shift = self.shift();
        let p = (row >> shift) & 3;
        let base = row & !(3 << shift);
        (0..4).filter_map(move |q| {
            let v = &self.local[p][q];
            (!v.is_zero()).then_some((base | (q << shift), v))
        })
    }

    /// 0-based entry.
    pub fn entry(&self, row: usize, col: usize) -> S {
        self.row_entries(row)
            .find(|&(c, _)| c == col)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(S::zero)
    }

    /// `self · m` without densifying `self`.
    pub fn apply_left(&self, m: &Matrix<S>) -> Matrix<S> {
        let dim = self.dim();
        assert_eq!(m.dim(), dim);
        let mut out = Matrix::<S>::zeros(dim);
        for r in 0..dim {
            for (c, v) in self.row_entries(r) {
                for (j, x) in m.row(c).iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let acc = out.get(r, j).clone() + v.clone() * x.clone();
                    out.set(r, j, acc);
                }
            }
        }
        out
    }

    /// `self · v`.
    pub fn apply_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.dim())
            .map(|r| {
                self.row_entries(r)
                    .fold(S::zero(), |acc, (c, a)| acc + a.clone() * v[c].clone())
            })
            .collect()
    }

    /// Dense form, for inspection and tests on small systems.
    pub fn to_dense(&self) -> Matrix<S> {
        self.apply_left(&Matrix::identity(self.dim()))
    }
}

/// `T_l(α, β) = I^(l-1) ⊗ S_βα ⊗ I^(N-l-1)`.
pub fn t_operator<S: Scalar>(
    l: usize,
    xi_alpha: &S,
    xi_beta: &S,
    n: usize,
) -> Result<SlotOperator<S>> {
    if n < 2 || l == 0 || l >= n {
        return Err(Error::IndexOutOfRange { index: l, max: n.saturating_sub(1) });
    }
    SlotOperator::new(l, n, s_matrix(xi_alpha, xi_beta)?.entries)
}

/// `I^(l-1) ⊗ B ⊗ I^(N-l-1)`.
pub fn boundary_operator<S: Scalar>(l: usize, n: usize) -> Result<SlotOperator<S>> {
    SlotOperator::new(l, n, boundary_matrix())
}

/// The factors `T_{a_1}, .., T_{a_n}` of a word, in application order, with
/// `(α, β)` read off by replaying the word on the identity.
pub fn word_factors<S: Scalar>(
    word: &[usize],
    point: &SpectralPoint<S>,
) -> Result<Vec<SlotOperator<S>>> {
    let n = point.n();
    let mut images: Vec<usize> = (1..=n).collect();
    word.iter()
        .map(|&a| {
            if a == 0 || a >= n {
                return Err(Error::IndexOutOfRange { index: a, max: n - 1 });
            }
            let (alpha, beta) = (images[a - 1], images[a]);
            images.swap(a - 1, a);
            t_operator(a, point.xi(alpha), point.xi(beta), n)
        })
        .collect()
}

/// `A_σ = T_{a_n} .. T_{a_1}` for an arbitrary word of `σ`.
pub fn amplitude_from_word<S: Scalar>(word: &[usize], point: &SpectralPoint<S>) -> Result<Matrix<S>> {
    let mut m = Matrix::identity(1 << point.n());
    for t in word_factors(word, point)? {
        m = t.apply_left(&m);
    }
    Ok(m)
}

pub fn amplitude<S: Scalar>(sigma: &Permutation, point: &SpectralPoint<S>) -> Result<Matrix<S>> {
    check_size(sigma, point)?;
    amplitude_from_word(&sigma.adjacent_decomposition(), point)
}

/// Column `col` of `A_σ`, computed as a product of factors with a vector.
pub fn amplitude_column<S: Scalar>(
    sigma: &Permutation,
    point: &SpectralPoint<S>,
    col: usize,
) -> Result<Vec<S>> {
    check_size(sigma, point)?;
    let dim = 1 << point.n();
    let mut v = vec![S::zero(); dim];
    v[col] = S::one();
    for t in word_factors(&sigma.adjacent_decomposition(), point)? {
        v = t.apply_vec(&v);
    }
    Ok(v)
}

/// Closed form of the `21..1` diagonal entry:
/// `sgn(σ) ∏_{i=0}^{N-2} ((1 - ξ_{2+i}) / (1 - ξ_{σ(2+i)}))^i`.
pub fn amplitude_center<S: Scalar>(sigma: &Permutation, point: &SpectralPoint<S>) -> Result<S> {
    check_size(sigma, point)?;
    let n = point.n();
    let mut acc = S::from_i64(sigma.sign());
    for i in 1..n.saturating_sub(1) {
        let num = S::one() - point.xi(2 + i).clone();
        let den = S::one() - point.xi(sigma.apply(2 + i)).clone();
        if den.is_zero() {
            return Err(Error::Pole(format!("ξ_{} = 1", sigma.apply(2 + i))));
        }
        acc = acc * pow_int(&(num / den), i as i64);
    }
    Ok(acc)
}

fn check_size<S: Scalar>(sigma: &Permutation, point: &SpectralPoint<S>) -> Result<()> {
    if sigma.len() != point.n() {
        return Err(Error::Domain(format!(
            "permutation of {} elements at a point with {} components",
            sigma.len(),
            point.n()
        )));
    }
    Ok(())
}

/// Outcome of checking the three braid-type relations of the `T` operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BraidReport {
    pub commuting: bool,
    pub yang_baxter: bool,
    pub inverse: bool,
    pub instances: usize,
}

impl BraidReport {
    pub fn holds(&self) -> bool {
        self.commuting && self.yang_baxter && self.inverse
    }
}

fn product<S: Scalar>(factors: &[&SlotOperator<S>], dim: usize) -> Matrix<S> {
    // factors are listed left to right, so apply from the right end
    factors
        .iter()
        .rev()
        .fold(Matrix::identity(dim), |m, t| t.apply_left(&m))
}

/// Checks, for every admissible slot pair, (i) `T_i T_j = T_j T_i` when
/// `|i - j| ≥ 2`, (ii) `T_i(β,γ) T_j(α,γ) T_i(α,β) = T_j(α,β) T_i(α,γ) T_j(β,γ)`
/// when `|i - j| = 1`, and (iii) `T_i(β,α) T_i(α,β) = I`. Parameters cycle
/// through the components of `point`. `tol` is ignored for exact fields.
pub fn braid_check<S: Scalar>(point: &SpectralPoint<S>, tol: f64) -> Result<BraidReport> {
    let n = point.n();
    let dim = 1 << n;
    let x = |k: usize| point.xi(k % n + 1);
    let mut report = BraidReport { commuting: true, yang_baxter: true, inverse: true, instances: 0 };
    if n < 2 {
        return Ok(report);
    }
    let mut counter = 0;
    for i in 1..n {
        for j in 1..n {
            let (a, b, c, d) = (x(counter), x(counter + 1), x(counter + 2), x(counter + 3));
            counter += 1;
            if i == j {
                let fwd = t_operator(i, a, b, n)?;
                let back = t_operator(i, b, a, n)?;
                let ok = product(&[&back, &fwd], dim).approx_eq(&Matrix::identity(dim), tol);
                report.inverse &= ok;
            } else if i.abs_diff(j) == 1 {
                let lhs = product(
                    &[&t_operator(i, b, c, n)?, &t_operator(j, a, c, n)?, &t_operator(i, a, b, n)?],
                    dim,
                );
                let rhs = product(
                    &[&t_operator(j, a, b, n)?, &t_operator(i, a, c, n)?, &t_operator(j, b, c, n)?],
                    dim,
                );
                report.yang_baxter &= lhs.approx_eq(&rhs, tol);
            } else {
                let ti = t_operator(i, a, b, n)?;
                let tj = t_operator(j, c, d, n)?;
                let ok = product(&[&ti, &tj], dim).approx_eq(&product(&[&tj, &ti], dim), tol);
                report.commuting &= ok;
            }
            report.instances += 1;
        }
    }
    Ok(report)
}

/// Residuals of the Bethe ansatz `F(X) = Σ_σ A_σ ∏_i ξ_{σ(i)}^{x_i}`.
///
/// The time factor `e^{εt}` multiplies every term equally and is left out.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals<S> {
    /// `ε F(X) - Σ_i F(X - e_i) + N F(X)`.
    pub free: Matrix<S>,
    /// `F(.., x_i, x_i, ..) - B_i F(.., x_i, x_i + 1, ..)` for `i = 1..N-1`.
    pub boundary: Vec<Matrix<S>>,
}

impl<S: Scalar> Residuals<S> {
    pub fn free_norm(&self) -> f64 {
        self.free.max_magnitude()
    }

    pub fn boundary_norms(&self) -> Vec<f64> {
        self.boundary.iter().map(Matrix::max_magnitude).collect()
    }

    pub fn vanish(&self, tol: f64) -> bool {
        let zero = |m: &Matrix<S>| {
            if S::EXACT {
                m.is_zero()
            } else {
                m.max_magnitude() <= tol
            }
        };
        zero(&self.free) && self.boundary.iter().all(zero)
    }
}

pub fn bethe_residuals<S: Scalar>(point: &SpectralPoint<S>, x: &[i64]) -> Result<Residuals<S>> {
    let n = point.n();
    if x.len() != n {
        return Err(Error::Domain(format!("{} coordinates for {} particles", x.len(), n)));
    }
    let amps: Vec<(Permutation, Matrix<S>)> = crate::combinatorics::enumerate(n)?
        .into_iter()
        .map(|s| {
            let a = amplitude(&s, point)?;
            Ok((s, a))
        })
        .collect::<Result<_>>()?;
    let dim = 1 << n;
    let f = |pos: &[i64]| -> Matrix<S> {
        amps.iter().fold(Matrix::zeros(dim), |acc, (sigma, a)| {
            let w = (0..n).fold(S::one(), |w, i| w * pow_int(point.xi(sigma.apply(i + 1)), pos[i]));
            acc.add(&a.scale(&w))
        })
    };

    let fx = f(x);
    let mut free = fx.scale(&(point.energy() + S::from_i64(n as i64)));
    for i in 0..n {
        let mut shifted = x.to_vec();
        shifted[i] -= 1;
        free = free.sub(&f(&shifted));
    }

    let mut boundary = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let mut coincident = x.to_vec();
        coincident[i] = x[i - 1];
        let mut adjacent = x.to_vec();
        adjacent[i] = x[i - 1] + 1;
        let b = boundary_operator::<S>(i, n)?;
        boundary.push(f(&coincident).sub(&b.apply_left(&f(&adjacent))));
    }
    Ok(Residuals { free, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate;
    use crate::scalar::rational;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn q(n: i64, d: i64) -> BigRational {
        rational(n, d)
    }

    fn point(v: &[(i64, i64)]) -> SpectralPoint<BigRational> {
        SpectralPoint::new(v.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    #[test]
    fn s_matrix_entries() {
        let s = s_matrix(&q(1, 2), &q(1, 3)).unwrap();
        assert_eq!(*s.scalar(), q(-4, 3));
        assert_eq!(*s.entry(1, 2), q(-1, 3));
        assert_eq!(*s.entry(2, 2), q(-1, 1));
        assert_eq!(*s.entry(3, 3), q(-4, 3));
        assert!(s.to_matrix().is_upper_triangular());
    }

    #[test]
    fn s_matrix_equal_parameters_is_minus_identity() {
        let s = s_matrix(&q(1, 2), &q(1, 2)).unwrap();
        assert_eq!(s.to_matrix(), Matrix::identity(4).scale(&q(-1, 1)));
    }

    #[test]
    fn s_matrix_inverse_relation() {
        let fwd = s_matrix(&q(1, 2), &q(1, 3)).unwrap().to_matrix();
        let back = s_matrix(&q(1, 3), &q(1, 2)).unwrap().to_matrix();
        assert_eq!(back.mul(&fwd), Matrix::identity(4));
    }

    #[test]
    fn s_matrix_pole() {
        assert!(matches!(s_matrix(&q(1, 1), &q(1, 2)), Err(Error::Pole(_))));
    }

    #[test]
    fn s_matrix_from_boundary_matrix() {
        // -(I - ξ_α B)^{-1} (I - ξ_β B) == S_βα
        let (a, b) = (q(2, 7), q(5, 11));
        let bm = Matrix::from_rows(boundary_matrix::<BigRational>().iter().map(|r| r.to_vec()).collect());
        let id = Matrix::identity(4);
        let left = id.sub(&bm.scale(&a)).inverse().unwrap();
        let right = id.sub(&bm.scale(&b));
        let derived = left.mul(&right).scale(&q(-1, 1));
        assert_eq!(derived, s_matrix(&a, &b).unwrap().to_matrix());
    }

    #[test]
    fn t_operator_two_sites_is_s_matrix() {
        let t = t_operator(1, &q(1, 2), &q(1, 3), 2).unwrap();
        assert_eq!(t.to_dense(), s_matrix(&q(1, 2), &q(1, 3)).unwrap().to_matrix());
    }

    #[test]
    fn t_operator_three_sites_block_structure() {
        let t = t_operator(1, &q(1, 2), &q(1, 3), 3).unwrap();
        // 1-based (5,5) is local (3,3) of S ⊗ I_2
        assert_eq!(t.entry(4, 4), q(-1, 1));
        let dense = t.to_dense();
        for r in 0..8 {
            let nonzeros = (0..8).filter(|&c| !dense.get(r, c).is_zero()).count();
            assert!(nonzeros <= 2);
        }
        assert!(dense.is_upper_triangular());
    }

    #[test]
    fn t_operator_center_entry() {
        let (a, b) = (q(1, 2), q(1, 3));
        let s = s_matrix(&a, &b).unwrap();
        for n in 2..=5 {
            let c = center_index(n);
            for l in 1..n {
                let t = t_operator(l, &a, &b, n).unwrap();
                let expected = if l == 1 { q(-1, 1) } else { s.scalar().clone() };
                assert_eq!(t.entry(c, c), expected, "n={n} l={l}");
            }
        }
    }

    #[test]
    fn t_operator_index_out_of_range() {
        assert!(t_operator(0, &q(1, 2), &q(1, 3), 3).is_err());
        assert!(t_operator(3, &q(1, 2), &q(1, 3), 3).is_err());
        assert!(t_operator(1, &q(1, 2), &q(1, 3), 1).is_err());
    }

    #[test]
    fn amplitude_identity_and_two_particle_display() {
        let p = point(&[(1, 2), (1, 3)]);
        assert_eq!(amplitude(&Permutation::identity(2), &p).unwrap(), Matrix::identity(4));
        let sigma = Permutation::new(vec![2, 1]).unwrap();
        let a = amplitude(&sigma, &p).unwrap();
        // -(1-ξ_2)/(1-ξ_1) = -(2/3)/(1/2)
        let s = q(-4, 3);
        assert_eq!(*a.get(0, 0), s);
        assert_eq!(*a.get(1, 1), s);
        assert_eq!(*a.get(3, 3), s);
        assert_eq!(*a.get(2, 2), q(-1, 1));
        assert_eq!(*a.get(1, 2), q(-1, 3));
    }

    #[test]
    fn amplitude_word_independence() {
        let p = point(&[(1, 2), (1, 3), (1, 5)]);
        let sigma = Permutation::new(vec![3, 2, 1]).unwrap();
        let w1 = [1, 2, 1];
        let w2 = [2, 1, 2];
        assert_eq!(Permutation::from_word(3, &w1).unwrap(), sigma);
        assert_eq!(Permutation::from_word(3, &w2).unwrap(), sigma);
        assert_eq!(amplitude_from_word(&w1, &p).unwrap(), amplitude_from_word(&w2, &p).unwrap());
        // a non-reduced word (with T_1 T_1 inserted) gives the same matrix
        let w3 = [1, 1, 1, 2, 1];
        assert_eq!(amplitude_from_word(&w3, &p).unwrap(), amplitude(&sigma, &p).unwrap());
    }

    #[test]
    fn amplitude_center_examples() {
        let p2 = point(&[(1, 2), (1, 3)]);
        let swap = Permutation::new(vec![2, 1]).unwrap();
        assert_eq!(amplitude_center(&swap, &p2).unwrap(), q(-1, 1));

        let p3 = point(&[(1, 2), (1, 3), (1, 5)]);
        assert_eq!(amplitude_center(&Permutation::identity(3), &p3).unwrap(), BigRational::one());
        let sigma = Permutation::new(vec![1, 3, 2]).unwrap();
        assert_eq!(amplitude_center(&sigma, &p3).unwrap(), q(-6, 5));
        let c = center_index(3);
        assert_eq!(*amplitude(&sigma, &p3).unwrap().get(c, c), q(-6, 5));

        let p1 = point(&[(1, 2)]);
        assert_eq!(amplitude_center(&Permutation::identity(1), &p1).unwrap(), BigRational::one());
    }

    #[test]
    fn amplitude_structure_for_all_permutations() {
        let p = point(&[(1, 2), (1, 3), (1, 5), (2, 7)]);
        let c = center_index(4);
        for sigma in enumerate(4).unwrap() {
            let a = amplitude(&sigma, &p).unwrap();
            assert!(a.is_upper_triangular());
            for col in 0..16 {
                if col != c {
                    assert!(a.get(c, col).is_zero());
                }
            }
            assert_eq!(*a.get(c, c), amplitude_center(&sigma, &p).unwrap());
            // diagonal is the product of the factor diagonals
            let factors = word_factors(&sigma.adjacent_decomposition(), &p).unwrap();
            for d in 0..16 {
                let prod = factors.iter().fold(BigRational::one(), |acc, t| acc * t.entry(d, d));
                assert_eq!(*a.get(d, d), prod);
            }
            let col = amplitude_column(&sigma, &p, 5).unwrap();
            assert_eq!(col, a.column(5));
        }
    }

    #[test]
    fn braid_relations_examples() {
        let p3 = point(&[(1, 2), (1, 3), (1, 5)]);
        let r = braid_check(&p3, 0.0).unwrap();
        assert!(r.holds());
        assert!(r.instances > 0);

        let p4 = point(&[(1, 2), (1, 3), (1, 5), (3, 7)]);
        let t1 = t_operator(1, &q(1, 2), &q(1, 3), 4).unwrap().to_dense();
        let t3 = t_operator(3, &q(1, 5), &q(3, 7), 4).unwrap().to_dense();
        assert_eq!(t1.mul(&t3), t3.mul(&t1));
        assert!(braid_check(&p4, 0.0).unwrap().holds());

        let p2 = point(&[(1, 2), (1, 3)]);
        assert!(braid_check(&p2, 0.0).unwrap().inverse);
    }

    #[test]
    fn braid_relations_in_floating_point() {
        use num_complex::Complex64;
        let p = SpectralPoint::new(vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.4),
            Complex64::new(0.1, -0.45),
            Complex64::new(0.45, 0.05),
        ])
        .unwrap();
        assert!(braid_check(&p, 1e-12).unwrap().holds());
    }

    #[test]
    fn residuals_vanish_exactly() {
        let p = point(&[(1, 2), (1, 3)]);
        let r = bethe_residuals(&p, &[0, 1]).unwrap();
        assert!(r.vanish(0.0));
        assert_eq!(r.boundary.len(), 1);

        let p1 = point(&[(2, 3)]);
        let r1 = bethe_residuals(&p1, &[4]).unwrap();
        assert!(r1.free.is_zero());
        assert!(r1.boundary.is_empty());

        let p3 = point(&[(3, 7), (5, 11), (1, 13)]);
        let r3 = bethe_residuals(&p3, &[0, 1, 5]).unwrap();
        assert!(r3.vanish(0.0));
        assert_eq!(r3.boundary_norms(), vec![0.0, 0.0]);
    }

    #[test]
    fn wrong_boundary_matrix_is_detected() {
        // flipping the exchange orientation breaks the boundary condition
        let p = point(&[(1, 2), (1, 3)]);
        let swap = Permutation::new(vec![2, 1]).unwrap();
        let a = amplitude(&swap, &p).unwrap();
        let wrong = s_matrix(&q(1, 3), &q(1, 2)).unwrap().to_matrix();
        assert_ne!(a, wrong);
    }

    #[test]
    fn spectral_point_validation() {
        assert!(SpectralPoint::new(vec![q(1, 2), q(1, 2)]).is_err());
        assert!(SpectralPoint::new(vec![q(0, 1)]).is_err());
        assert!(matches!(SpectralPoint::new(vec![q(1, 1)]), Err(Error::Pole(_))));
        assert!(SpectralPoint::on_contour(vec![q(1, 2), q(1, 2)]).is_ok());
        assert_eq!(word_index(&[2, 1, 1]), center_index(3));
        assert_eq!(word_index(&[1, 2]), 1);
    }
}
