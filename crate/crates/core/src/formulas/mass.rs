//! Truncated sums of transition probabilities with certified tail bounds.
//!
//! Every displacement of a particle uses one ring of some clock, so
//! `x_N(t) - y_N` is dominated by a Poisson(`N t`) count. Anything beyond a
//! window `W` therefore carries at most `P(Poisson(N t) > W - y_N)`.

use statrs::distribution::{DiscreteCDF, Poisson};

use crate::error::{Error, Result};
use crate::scalar::KahanSum;

use super::transition::head_residue;
use super::{Configuration, ResidueTable, TransitionKernel, FIRST_CLASS, SECOND_CLASS};

/// Largest `N` for which the whole window is enumerated.
pub const MASS_CHECK_MAX_N: usize = 3;
/// Tail bounds above this are reported as a warning.
pub const TAIL_WARNING: f64 = 1e-8;

/// `P(Poisson(λ) > m)`.
pub fn poisson_upper_tail(lambda: f64, m: i64) -> f64 {
    if m < 0 {
        return 1.0;
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    Poisson::new(lambda).map(|p| p.sf(m as u64)).unwrap_or(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassCheck {
    pub total: f64,
    pub tail_bound: f64,
    pub window: i64,
    pub configurations: usize,
    pub warning: Option<String>,
}

impl MassCheck {
    /// `|total - 1| ≤ tol + tail_bound`.
    pub fn holds(&self, tol: f64) -> bool {
        (self.total - 1.0).abs() <= tol + self.tail_bound
    }
}

/// All `x_1 < .. < x_N ≤ window` with `x_i ≥ lower_i`.
fn ordered_positions(lower: &[i64], window: i64, mut visit: impl FnMut(&[i64])) {
    fn rec(lower: &[i64], window: i64, slot: usize, cur: &mut Vec<i64>, visit: &mut dyn FnMut(&[i64])) {
        let n = lower.len();
        if slot == n {
            visit(cur);
            return;
        }
        let from = if slot == 0 { lower[0] } else { lower[slot].max(cur[slot - 1] + 1) };
        let to = window - (n - 1 - slot) as i64;
        for v in from..=to {
            cur.push(v);
            rec(lower, window, slot + 1, cur, visit);
            cur.pop();
        }
    }
    rec(lower, window, 0, &mut Vec::with_capacity(lower.len()), &mut visit);
}

/// Species words of length `n` with `firsts` first class particles.
fn words_with(n: usize, firsts: usize) -> Vec<Vec<u8>> {
    (0..1usize << n)
        .filter(|m| m.count_ones() as usize == firsts)
        .map(|m| {
            (0..n)
                .map(|p| if m >> (n - 1 - p) & 1 == 1 { FIRST_CLASS } else { SECOND_CLASS })
                .collect()
        })
        .collect()
}

fn tail_warning(tail: f64) -> Option<String> {
    (tail > TAIL_WARNING).then(|| format!("window too small: tail bound {tail:e}"))
}

/// Sum of `P_{(Y,ν)}(X, π; t)` over every `X` with `x_N ≤ window` and every
/// reachable `π`.
pub fn probability_mass_check(y: &Configuration, t: f64, window: i64) -> Result<MassCheck> {
    let n = y.n();
    if n > MASS_CHECK_MAX_N {
        return Err(Error::Size { n, cap: MASS_CHECK_MAX_N });
    }
    let mut kernel = TransitionKernel::new(y, t)?;
    let firsts = y.species().iter().filter(|&&s| s == FIRST_CLASS).count();
    let words = words_with(n, firsts);
    let mut sum = KahanSum::new();
    let mut count = 0usize;
    let mut failure = None;
    ordered_positions(y.positions(), window, |xs| {
        for w in &words {
            let x = Configuration::new(xs.to_vec(), w.clone()).expect("ordered by construction");
            match kernel.probability(&x) {
                Ok(p) => sum.add(p),
                Err(e) => failure = Some(e),
            }
            count += 1;
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let tail = poisson_upper_tail(n as f64 * t, window - y.positions()[n - 1]);
    Ok(MassCheck {
        total: sum.value(),
        tail_bound: tail,
        window,
        configurations: count,
        warning: tail_warning(tail),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowSum {
    pub total: f64,
    pub tail_bound: f64,
    pub terms: usize,
    pub warning: Option<String>,
}

/// `Σ_{x < x_2 < .. < x_N ≤ window} P_{(Y,21..1)}(X, 21..1; t)` with `x_1 = x`.
///
/// The untruncated sum is the leftmost-particle probability; the omitted
/// part is bounded by the Poisson tail.
pub fn head_window_sum(y: &Configuration, x: i64, t: f64, window: i64) -> Result<WindowSum> {
    if !y.is_head() {
        return Err(Error::Domain(format!("species word {} is not 21..1", y.species_word())));
    }
    let n = y.n();
    let ys = y.positions();
    let tail = poisson_upper_tail(n as f64 * t, window - ys[n - 1]);
    if x < ys[0] {
        return Ok(WindowSum { total: 0.0, tail_bound: tail, terms: 0, warning: None });
    }
    let mut lower = ys.to_vec();
    lower[0] = x;
    let mut table = ResidueTable::new(t)?;
    let mut sum = KahanSum::new();
    let mut terms = 0usize;
    let mut failure = None;
    ordered_positions(&lower, window, |xs| {
        if xs[0] != x {
            return;
        }
        match head_residue(ys, xs, &mut table) {
            Ok(p) => sum.add(p),
            Err(e) => failure = Some(e),
        }
        terms += 1;
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(WindowSum { total: sum.value(), tail_bound: tail, terms, warning: tail_warning(tail) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_tail_values() {
        assert_eq!(poisson_upper_tail(1.0, -1), 1.0);
        assert_eq!(poisson_upper_tail(0.0, 3), 0.0);
        let expected = 1.0 - (-1.0f64).exp() * (1.0 + 1.0 + 0.5);
        assert!((poisson_upper_tail(1.0, 2) - expected).abs() < 1e-14);
        assert!(poisson_upper_tail(2.0, 60) < 1e-40);
    }

    #[test]
    fn window_enumeration() {
        let mut seen = Vec::new();
        ordered_positions(&[1, 2], 4, |xs| seen.push(xs.to_vec()));
        assert_eq!(seen, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        assert_eq!(words_with(3, 1).len(), 3);
        assert_eq!(words_with(2, 1), vec![vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn single_particle_mass() {
        let y = Configuration::head(vec![0]).unwrap();
        let m = probability_mass_check(&y, 1.0, 60).unwrap();
        assert!((m.total - 1.0).abs() < 1e-12);
        assert!(m.warning.is_none());
    }

    #[test]
    fn zero_time_mass_is_exact() {
        let y = Configuration::parse("1,2", "21").unwrap();
        let m = probability_mass_check(&y, 0.0, 5).unwrap();
        assert_eq!(m.total, 1.0);
        assert_eq!(m.tail_bound, 0.0);
    }

    #[test]
    fn small_window_warns() {
        let y = Configuration::parse("1,2", "21").unwrap();
        let m = probability_mass_check(&y, 1.0, 4).unwrap();
        assert!(m.warning.is_some());
        assert!(m.holds(1e-6));
    }

    #[test]
    fn oversized_mass_check_rejected() {
        let y = Configuration::parse("1,2,3,4", "2111").unwrap();
        assert!(matches!(probability_mass_check(&y, 1.0, 10), Err(Error::Size { .. })));
    }
}
