//! Probability formulas for the process started from `(Y, ν)`.
//!
//! Every formula has at least two evaluation paths: an exact residue
//! expansion into one-variable integrals and a tensor-grid quadrature of the
//! multiple contour integral. The leftmost-particle formulas also have a
//! determinant form.

mod leftmost;
mod mass;
mod transition;

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::bethe::word_index;
use crate::combinatorics::enumerate_with_cap;
use crate::contour::{multi_contour, residue_value, QuadratureSpec, ResidueIntegrand};
use crate::error::{Error, Result};
use crate::scalar::KahanSum;

pub use leftmost::{
    leftmost_probability, leftmost_probability_shifted_step, leftmost_probability_step_det,
    tasep_leftmost_probability,
};
pub use mass::{head_window_sum, poisson_upper_tail, probability_mass_check, MassCheck, WindowSum};
pub use transition::{head_transition_probability, transition_probability, TransitionKernel};

/// Largest `N` for the alternating `N!`-term residue sums.
pub const RESIDUE_MAX_N: usize = 8;
/// Largest `N` for the `N!²`-term shifted-step expansion.
pub const DOUBLE_SUM_MAX_N: usize = 6;
/// Above this time quadrature is refused; the integrand grows like `e^{2t}`.
pub const QUADRATURE_MAX_T: f64 = 30.0;

/// Species 2 is first class, species 1 second class.
pub const FIRST_CLASS: u8 = 2;
pub const SECOND_CLASS: u8 = 1;

/// Ordered positions `x_1 < .. < x_N` and the species of each particle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    positions: Vec<i64>,
    species: Vec<u8>,
}

impl Configuration {
    pub fn new(positions: Vec<i64>, species: Vec<u8>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidConfiguration("no particles".into()));
        }
        if positions.len() != species.len() {
            return Err(Error::InvalidConfiguration(format!(
                "{} positions but {} species labels",
                positions.len(),
                species.len()
            )));
        }
        if let Some(w) = positions.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfiguration(format!(
                "positions must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(s) = species.iter().find(|&&s| s != FIRST_CLASS && s != SECOND_CLASS) {
            return Err(Error::InvalidConfiguration(format!("species label {s} is not 1 or 2")));
        }
        Ok(Configuration { positions, species })
    }

    /// First class particle at the left, second class particles behind it.
    pub fn head(positions: Vec<i64>) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, head_word(n))
    }

    /// Single-species configuration.
    pub fn uniform(positions: Vec<i64>, species: u8) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, vec![species; n])
    }

    /// `"1,2,5"` and `"211"`.
    pub fn parse(positions: &str, species: &str) -> Result<Self> {
        Self::new(parse_positions(positions)?, parse_species(species)?)
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn species(&self) -> &[u8] {
        &self.species
    }

    /// Row/column index of the species word in the amplitude matrices.
    pub fn species_index(&self) -> usize {
        word_index(&self.species)
    }

    pub fn is_head(&self) -> bool {
        self.species == head_word(self.n())
    }

    pub fn is_uniform(&self) -> bool {
        self.species.iter().all(|&s| s == self.species[0])
    }

    pub fn same_species_counts(&self, other: &Configuration) -> bool {
        let count = |c: &Configuration| c.species.iter().filter(|&&s| s == FIRST_CLASS).count();
        self.n() == other.n() && count(self) == count(other)
    }

    pub fn species_word(&self) -> String {
        self.species.iter().map(|s| char::from(b'0' + s)).collect()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        write!(f, "(({}),{})", pos.join(","), self.species_word())
    }
}

/// The word `21..1`.
pub fn head_word(n: usize) -> Vec<u8> {
    let mut w = vec![SECOND_CLASS; n];
    if n > 0 {
        w[0] = FIRST_CLASS;
    }
    w
}

pub fn parse_positions(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidConfiguration(format!("cannot parse position {p:?}")))
        })
        .collect()
}

pub fn parse_species(s: &str) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .filter(|c| *c != ',')
        .map(|c| match c {
            '1' => Ok(SECOND_CLASS),
            '2' => Ok(FIRST_CLASS),
            other => Err(Error::InvalidConfiguration(format!("species {other:?} is not 1 or 2"))),
        })
        .collect()
}

/// `y_1 = 1`, `y_i = i + l` for `i > 1`; `l = 0` is the step initial condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepInitial {
    pub l: u32,
}

impl StepInitial {
    pub fn new(l: u32) -> Self {
        StepInitial { l }
    }

    pub fn positions(&self, n: usize) -> Vec<i64> {
        (1..=n as i64).map(|i| if i == 1 { 1 } else { i + self.l as i64 }).collect()
    }

    pub fn configuration(&self, n: usize) -> Result<Configuration> {
        Configuration::head(self.positions(n))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Exact residue expansion into one-variable series.
    Residue,
    /// Determinant of one-variable integrals (leftmost-particle formulas only).
    Determinant,
    /// Tensor-grid trapezoidal rule on circles.
    Quadrature(QuadratureSpec),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Residue => "residue",
            Method::Determinant => "determinant",
            Method::Quadrature(_) => "quadrature",
        }
    }
}

/// A formula value with the path that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub method: &'static str,
    /// Quadrature only: last doubling difference or imaginary residue.
    pub error_estimate: Option<f64>,
    pub points: Option<usize>,
}

impl Evaluation {
    fn exact(value: f64, method: &'static str) -> Self {
        Evaluation { value: normalize_zero(value), method, error_estimate: None, points: None }
    }
}

/// `-0.0` prints differently from `0.0`; keep outputs canonical.
fn normalize_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Memoized `I(k, e, t)` at a fixed time.
#[derive(Clone, Debug)]
pub struct ResidueTable {
    t: f64,
    cache: HashMap<(i64, i64), f64>,
}

impl ResidueTable {
    pub fn new(t: f64) -> Result<Self> {
        ResidueIntegrand::new(0, 0, t)?;
        Ok(ResidueTable { t, cache: HashMap::new() })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn get(&mut self, k: i64, e: i64) -> f64 {
        let t = self.t;
        *self
            .cache
            .entry((k, e))
            .or_insert_with(|| residue_value(&ResidueIntegrand { k, e, t }))
    }
}

/// `Σ_σ sgn σ ∏_i f[i][σ(i)]`, Kahan-accumulated.
fn permutation_sum(f: &[Vec<f64>], cap: usize) -> Result<f64> {
    let n = f.len();
    let mut sum = KahanSum::new();
    for sigma in enumerate_with_cap(n, cap)? {
        let prod: f64 = (0..n).map(|i| f[i][sigma.images()[i] - 1]).product();
        sum.add(sigma.sign() as f64 * prod);
    }
    Ok(sum.value())
}

fn check_quadrature_time(t: f64) -> Result<()> {
    if t > QUADRATURE_MAX_T {
        return Err(Error::Domain(format!(
            "quadrature is not used above t = {QUADRATURE_MAX_T}; use the residue method"
        )));
    }
    Ok(())
}

/// Runs an `N`-fold quadrature and packages the real part.
fn quadrature_eval<F>(f: F, n: usize, spec: &QuadratureSpec) -> Result<Evaluation>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let r = multi_contour(f, n, spec)?;
    Ok(Evaluation {
        value: normalize_zero(r.value.re),
        method: "quadrature",
        error_estimate: Some(r.delta.max(r.value.im.abs())),
        points: Some(r.points),
    })
}

/// `e^{(1/ξ - 1)t}`.
fn energy_factor(xi: Complex64, t: f64) -> Complex64 {
    ((xi.inv() - 1.0) * t).exp()
}
