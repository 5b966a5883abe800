//! `P_{(Y,ν)}(X, π; t)`: the `(π, ν)` entry of
//! `∮..∮ Σ_σ A_σ ∏_i ξ_{σ(i)}^{x_i - y_{σ(i)} - 1} e^{ε(ξ_i) t}`.

use num_complex::Complex64;

use crate::bethe::symbolic::{amplitude_column_symbolic, LaurentPoly};
use crate::bethe::{amplitude_center, amplitude_column, SpectralPoint};
use crate::combinatorics::{enumerate_with_cap, Permutation};
use crate::contour::QuadratureSpec;
use crate::error::{Error, Result};
use crate::scalar::KahanSum;

use super::{
    check_quadrature_time, energy_factor, quadrature_eval, Configuration, Evaluation, Method,
    ResidueTable, RESIDUE_MAX_N,
};

fn check_pair(y: &Configuration, x: &Configuration) -> Result<()> {
    if y.n() != x.n() {
        return Err(Error::Domain(format!("{} initial vs {} final particles", y.n(), x.n())));
    }
    if !y.same_species_counts(x) {
        return Err(Error::Domain(format!(
            "species {} cannot be rearranged into {}",
            y.species_word(),
            x.species_word()
        )));
    }
    Ok(())
}

/// Residue evaluation of every `P_{(Y,ν)}(·, ·; t)` for a fixed `(Y, ν, t)`.
///
/// The `ν` column of each `A_σ` is expanded once into monomials in `ξ_j` and
/// `1 - ξ_j`; every monomial then factors into one-variable integrals.
#[derive(Clone, Debug)]
pub struct TransitionKernel {
    initial: Configuration,
    perms: Vec<(Permutation, Permutation)>,
    columns: Vec<Vec<LaurentPoly>>,
    table: ResidueTable,
}

impl TransitionKernel {
    pub fn new(initial: &Configuration, t: f64) -> Result<Self> {
        let n = initial.n();
        let perms: Vec<(Permutation, Permutation)> = enumerate_with_cap(n, RESIDUE_MAX_N)?
            .into_iter()
            .map(|s| {
                let inv = s.inverse();
                (s, inv)
            })
            .collect();
        let col = initial.species_index();
        let columns = perms
            .iter()
            .map(|(s, _)| amplitude_column_symbolic(s, col))
            .collect::<Result<Vec<_>>>()?;
        Ok(TransitionKernel { initial: initial.clone(), perms, columns, table: ResidueTable::new(t)? })
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn probability(&mut self, x: &Configuration) -> Result<f64> {
        check_pair(&self.initial, x)?;
        let n = x.n();
        let row = x.species_index();
        let (xs, ys) = (x.positions(), self.initial.positions());
        let mut sum = KahanSum::new();
        for ((_, inv), column) in self.perms.iter().zip(&self.columns) {
            let poly = &column[row];
            if poly.is_zero() {
                continue;
            }
            // variable j carries ξ_j^{x_{σ^{-1}(j)} - y_j - 1}
            let base: Vec<i64> = (1..=n).map(|j| xs[inv.apply(j) - 1] - ys[j - 1] - 1).collect();
            for (mono, c) in poly.terms() {
                let mut prod = c as f64;
                for j in 0..n {
                    prod *= self.table.get(base[j] + mono[j] as i64, mono[n + j] as i64);
                    if prod == 0.0 {
                        break;
                    }
                }
                sum.add(prod);
            }
        }
        Ok(sum.value())
    }
}

pub fn transition_probability(
    y: &Configuration,
    x: &Configuration,
    t: f64,
    method: &Method,
) -> Result<Evaluation> {
    check_pair(y, x)?;
    match method {
        Method::Quadrature(spec) if t > 0.0 => transition_quadrature(y, x, t, spec),
        Method::Determinant => Err(Error::Domain(
            "transition probabilities have no determinant path here".into(),
        )),
        _ => {
            let value = TransitionKernel::new(y, t)?.probability(x)?;
            Ok(Evaluation::exact(value, "residue"))
        }
    }
}

fn transition_quadrature(
    y: &Configuration,
    x: &Configuration,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Evaluation> {
    check_quadrature_time(t)?;
    let n = y.n();
    let perms = enumerate_with_cap(n, RESIDUE_MAX_N)?;
    let (row, col) = (x.species_index(), y.species_index());
    let (xs, ys) = (x.positions().to_vec(), y.positions().to_vec());
    let integrand = |xi: &[Complex64]| -> Complex64 {
        let point = SpectralPoint::on_contour(xi.to_vec()).expect("nodes avoid 0 and 1");
        let mut total = Complex64::new(0.0, 0.0);
        for sigma in &perms {
            let a = amplitude_column(sigma, &point, col).expect("sizes agree")[row];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let plane: Complex64 = (1..=n)
                .map(|i| {
                    let s = sigma.apply(i);
                    xi[s - 1].powi((xs[i - 1] - ys[s - 1] - 1) as i32)
                })
                .product();
            total += a * plane;
        }
        total * xi.iter().map(|&v| energy_factor(v, t)).product::<Complex64>()
    };
    quadrature_eval(integrand, n, spec)
}

fn check_head(c: &Configuration) -> Result<()> {
    if !c.is_head() {
        return Err(Error::Domain(format!(
            "species word {} is not 21..1",
            c.species_word()
        )));
    }
    Ok(())
}

/// `P_{(Y,21..1)}(X, 21..1; t)` from the closed form of `[A_σ]`:
/// `Σ_σ sgn σ ∏_a I(x_{σ^{-1}(a)} - y_a - 1, (a-2)_+ - (σ^{-1}(a)-2)_+, t)`.
pub fn head_transition_probability(
    y: &Configuration,
    x: &Configuration,
    t: f64,
    method: &Method,
) -> Result<Evaluation> {
    check_head(y)?;
    check_head(x)?;
    check_pair(y, x)?;
    match method {
        Method::Quadrature(spec) if t > 0.0 => head_quadrature(y, x, t, spec),
        Method::Determinant => Err(Error::Domain(
            "transition probabilities have no determinant path here".into(),
        )),
        _ => {
            let mut table = ResidueTable::new(t)?;
            Ok(Evaluation::exact(head_residue(y.positions(), x.positions(), &mut table)?, "residue"))
        }
    }
}

fn plus(v: i64) -> i64 {
    v.max(0)
}

pub(super) fn head_residue(ys: &[i64], xs: &[i64], table: &mut ResidueTable) -> Result<f64> {
    let n = ys.len();
    let mut sum = KahanSum::new();
    for sigma in enumerate_with_cap(n, RESIDUE_MAX_N)? {
        let inv = sigma.inverse();
        let mut prod = sigma.sign() as f64;
        for a in 1..=n {
            let b = inv.apply(a);
            let k = xs[b - 1] - ys[a - 1] - 1;
            let e = plus(a as i64 - 2) - plus(b as i64 - 2);
            prod *= table.get(k, e);
            if prod == 0.0 {
                break;
            }
        }
        sum.add(prod);
    }
    Ok(sum.value())
}

fn head_quadrature(
    y: &Configuration,
    x: &Configuration,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Evaluation> {
    check_quadrature_time(t)?;
    let n = y.n();
    let perms = enumerate_with_cap(n, RESIDUE_MAX_N)?;
    let (xs, ys) = (x.positions().to_vec(), y.positions().to_vec());
    let integrand = |xi: &[Complex64]| -> Complex64 {
        let point = SpectralPoint::on_contour(xi.to_vec()).expect("nodes avoid 0 and 1");
        let mut total = Complex64::new(0.0, 0.0);
        for sigma in &perms {
            let a = amplitude_center(sigma, &point).expect("sizes agree");
            let plane: Complex64 = (1..=n)
                .map(|i| {
                    let s = sigma.apply(i);
                    xi[s - 1].powi((xs[i - 1] - ys[s - 1] - 1) as i32)
                })
                .product();
            total += a * plane;
        }
        total * xi.iter().map(|&v| energy_factor(v, t)).product::<Complex64>()
    };
    quadrature_eval(integrand, n, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> Method {
        Method::Quadrature(QuadratureSpec::default())
    }

    #[test]
    fn single_particle_is_poisson() {
        let y = Configuration::new(vec![0], vec![2]).unwrap();
        let x = Configuration::new(vec![3], vec![2]).unwrap();
        let expected = (-2.0f64).exp() * 8.0 / 6.0;
        let r = transition_probability(&y, &x, 2.0, &Method::Residue).unwrap();
        assert!((r.value - expected).abs() < 1e-15);
        let q = transition_probability(&y, &x, 2.0, &quad()).unwrap();
        assert!((q.value - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let y = Configuration::parse("1,2,4", "211").unwrap();
        for (pos, sp) in [("1,2,4", "211"), ("1,2,4", "121"), ("1,2,5", "211"), ("1,3,4", "112")] {
            let x = Configuration::parse(pos, sp).unwrap();
            let v = transition_probability(&y, &x, 0.0, &Method::Residue).unwrap().value;
            let expected = if x == y { 1.0f64 } else { 0.0 };
            assert_eq!(v.to_bits(), expected.to_bits(), "{x}");
            let q = transition_probability(&y, &x, 0.0, &quad()).unwrap().value;
            assert_eq!(q.to_bits(), expected.to_bits());
        }
    }

    #[test]
    fn species_mismatch_is_rejected() {
        let y = Configuration::parse("1,2", "21").unwrap();
        let x = Configuration::parse("1,3", "22").unwrap();
        assert!(matches!(
            transition_probability(&y, &x, 1.0, &Method::Residue),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn residue_and_quadrature_agree_for_two_particles() {
        let y = Configuration::parse("1,2", "21").unwrap();
        for (pos, sp) in [("1,3", "21"), ("2,3", "12"), ("2,4", "21"), ("3,4", "12")] {
            let x = Configuration::parse(pos, sp).unwrap();
            let r = transition_probability(&y, &x, 1.0, &Method::Residue).unwrap().value;
            let q = transition_probability(&y, &x, 1.0, &quad()).unwrap().value;
            assert!((r - q).abs() < 1e-11, "{x}: {r} vs {q}");
            assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn head_transition_matches_general_path() {
        let y = Configuration::parse("1,2,3", "211").unwrap();
        for pos in ["1,2,3", "1,3,4", "2,3,5", "2,4,6"] {
            let x = Configuration::parse(pos, "211").unwrap();
            let general = transition_probability(&y, &x, 0.8, &Method::Residue).unwrap().value;
            let head = head_transition_probability(&y, &x, 0.8, &Method::Residue).unwrap().value;
            assert!((general - head).abs() < 1e-13, "{x}: {general} vs {head}");
        }
    }

    #[test]
    fn head_transition_renewal_value() {
        // the first class particle stays at 1 iff its clock never rings
        let y = Configuration::parse("1,2", "21").unwrap();
        let mut total = 0.0;
        for x2 in 2..60 {
            let x = Configuration::head(vec![1, x2]).unwrap();
            total += head_transition_probability(&y, &x, 1.0, &Method::Residue).unwrap().value;
        }
        assert!((total - (-1.0f64).exp()).abs() < 1e-12);
    }
}
