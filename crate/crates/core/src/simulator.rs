//! Continuous-time Monte Carlo for the TASEP with second class particles.
//!
//! The `N` unit-rate clocks are superposed: the next ring comes after an
//! Exponential(`N`) wait and belongs to a uniformly chosen particle. A ring
//! moves the particle one site right if that site is empty, swaps the species
//! labels when a first class particle rings behind a second class one, and is
//! otherwise lost.

use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

use crate::error::{Error, Result};
use crate::formulas::{Configuration, FIRST_CLASS, SECOND_CLASS};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub runs: u64,
    pub seed: u64,
    /// Wall-clock seconds; not part of the reproducible output.
    #[serde(skip)]
    pub elapsed: f64,
}

impl SimulationEstimate {
    fn from_counts(hits: u64, runs: u64, seed: u64, elapsed: f64) -> Self {
        let p = hits as f64 / runs as f64;
        SimulationEstimate {
            estimate: p,
            std_error: (p * (1.0 - p) / runs as f64).sqrt(),
            hits,
            runs,
            seed,
            elapsed,
        }
    }
}

/// Mutable state used inside a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub positions: Vec<i64>,
    pub species: Vec<u8>,
}

impl State {
    pub fn from_configuration(c: &Configuration) -> Self {
        State { positions: c.positions().to_vec(), species: c.species().to_vec() }
    }

    pub fn to_configuration(&self) -> Configuration {
        Configuration::new(self.positions.clone(), self.species.clone())
            .expect("dynamics keep positions ordered")
    }

    /// A clock ring of particle `mover` (0-based).
    pub fn attempt(&mut self, mover: usize) {
        let target = self.positions[mover] + 1;
        let next = mover + 1;
        if next < self.positions.len() && self.positions[next] == target {
            if self.species[mover] == FIRST_CLASS && self.species[next] == SECOND_CLASS {
                self.species.swap(mover, next);
            }
        } else {
            self.positions[mover] = target;
        }
    }

    pub fn is_head_at(&self, x: i64) -> bool {
        self.positions[0] == x
            && self.species[0] == FIRST_CLASS
            && self.species[1..].iter().all(|&s| s == SECOND_CLASS)
    }

    pub fn matches(&self, c: &Configuration) -> bool {
        self.positions == c.positions() && self.species == c.species()
    }
}

/// Result of one attempted jump from `state` by particle `mover`.
pub fn apply_attempt(state: &Configuration, mover: usize) -> Result<Configuration> {
    if mover >= state.n() {
        return Err(Error::IndexOutOfRange { index: mover, max: state.n() - 1 });
    }
    let mut s = State::from_configuration(state);
    s.attempt(mover);
    Ok(s.to_configuration())
}

/// One clock ring: the new state and the waiting time before it.
pub fn step_dynamics<R: Rng>(state: &Configuration, rng: &mut R) -> (Configuration, f64) {
    let mut s = State::from_configuration(state);
    let dwell = ring(&mut s, rng);
    (s.to_configuration(), dwell)
}

fn ring<R: Rng>(s: &mut State, rng: &mut R) -> f64 {
    let n = s.positions.len();
    let dwell: f64 = Exp1.sample(rng);
    s.attempt(rng.random_range(0..n));
    dwell / n as f64
}

fn evolve<R: Rng>(s: &mut State, t: f64, rng: &mut R) {
    let n = s.positions.len() as f64;
    let mut clock = 0.0;
    loop {
        let dwell: f64 = Exp1.sample(rng);
        clock += dwell / n;
        if clock > t {
            return;
        }
        let mover = rng.random_range(0..s.positions.len());
        s.attempt(mover);
    }
}

/// The state at time `t`.
pub fn simulate_until<R: Rng>(y: &Configuration, t: f64, rng: &mut R) -> Result<Configuration> {
    check_time(t)?;
    let mut s = State::from_configuration(y);
    evolve(&mut s, t, rng);
    Ok(s.to_configuration())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// Generator of run `run`: the seed's ChaCha8 stream number `run`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

fn final_states<F, T>(y: &Configuration, t: f64, runs: u64, seed: u64, observe: F) -> Result<Vec<T>>
where
    F: Fn(&State) -> T + Sync,
    T: Send,
{
    check_time(t)?;
    if runs == 0 {
        return Err(Error::Domain("at least one run is required".into()));
    }
    let start = State::from_configuration(y);
    Ok((0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(seed, run);
            let mut s = start.clone();
            evolve(&mut s, t, &mut rng);
            observe(&s)
        })
        .collect())
}

/// Fraction of runs whose state at time `t` satisfies `predicate`.
pub fn estimate_event<F>(y: &Configuration, predicate: F, t: f64, runs: u64, seed: u64) -> Result<SimulationEstimate>
where
    F: Fn(&State) -> bool + Sync,
{
    let clock = Instant::now();
    let hits = final_states(y, t, runs, seed, predicate)?.into_iter().filter(|&b| b).count() as u64;
    Ok(SimulationEstimate::from_counts(hits, runs, seed, clock.elapsed().as_secs_f64()))
}

/// `P(species word 21..1 and x_1(t) = x)` by simulation.
pub fn estimate_leftmost(y: &Configuration, x: i64, t: f64, runs: u64, seed: u64) -> Result<SimulationEstimate> {
    estimate_event(y, |s| s.is_head_at(x), t, runs, seed)
}

/// `P(X(t) = X, π(t) = π)` by simulation.
pub fn estimate_transition(y: &Configuration, x: &Configuration, t: f64, runs: u64, seed: u64) -> Result<SimulationEstimate> {
    if y.n() != x.n() {
        return Err(Error::Domain(format!("{} initial vs {} final particles", y.n(), x.n())));
    }
    estimate_event(y, |s| s.matches(x), t, runs, seed)
}

/// Leftmost-event estimates for every `x` in `from..=to` from one batch of
/// runs. Run `r` uses the same stream as in [`estimate_leftmost`], so each
/// entry equals the single-position estimate.
pub fn estimate_leftmost_sweep(
    y: &Configuration,
    from: i64,
    to: i64,
    t: f64,
    runs: u64,
    seed: u64,
) -> Result<Vec<SimulationEstimate>> {
    estimate_position_sweep(y, from, to, t, runs, seed, |s| s.is_head_at(s.positions[0]))
}

/// For each `x` in `from..=to`, the fraction of runs with `x_1(t) = x` and
/// `accept` true.
pub fn estimate_position_sweep<F>(
    y: &Configuration,
    from: i64,
    to: i64,
    t: f64,
    runs: u64,
    seed: u64,
    accept: F,
) -> Result<Vec<SimulationEstimate>>
where
    F: Fn(&State) -> bool + Sync,
{
    let clock = Instant::now();
    let observed = final_states(y, t, runs, seed, |s| {
        let x = s.positions[0];
        ((from..=to).contains(&x) && accept(s)).then_some(x)
    })?;
    let width = (to - from + 1).max(0) as usize;
    let mut counts = vec![0u64; width];
    for x in observed.into_iter().flatten() {
        counts[(x - from) as usize] += 1;
    }
    let elapsed = clock.elapsed().as_secs_f64();
    Ok(counts.into_iter().map(|c| SimulationEstimate::from_counts(c, runs, seed, elapsed)).collect())
}

/// `(p̂ - p) / sqrt(p(1 - p)/runs)`, the standard error taken under the exact
/// value. A degenerate `p ∈ {0, 1}` gives 0 on exact agreement and infinity
/// otherwise.
pub fn z_score(exact: f64, estimate: &SimulationEstimate) -> f64 {
    let var = exact * (1.0 - exact) / estimate.runs as f64;
    let diff = estimate.estimate - exact;
    if var > 0.0 {
        diff / var.sqrt()
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Chi-square goodness of fit of single-particle displacements against
/// Poisson(`t`); bins with expected count below 5 are pooled into the tail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonFit {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

pub fn poisson_fit(t: f64, runs: u64, seed: u64) -> Result<PoissonFit> {
    if t <= 0.0 {
        return Err(Error::Domain("the Poisson fit needs t > 0".into()));
    }
    let y = Configuration::uniform(vec![0], FIRST_CLASS)?;
    let displacements = final_states(&y, t, runs, seed, |s| s.positions[0] as u64)?;
    let law = Poisson::new(t).map_err(|e| Error::Domain(e.to_string()))?;
    let total = runs as f64;
    let mut cells = 0u64;
    while law.pmf(cells) * total >= 5.0 || (cells as f64) < t {
        cells += 1;
    }
    let mut observed = vec![0u64; cells as usize + 1];
    for d in displacements {
        observed[d.min(cells) as usize] += 1;
    }
    let mut statistic = 0.0;
    for (k, &o) in observed.iter().enumerate() {
        let p = if (k as u64) < cells { law.pmf(k as u64) } else { law.sf(cells - 1) };
        let e = p * total;
        statistic += (o as f64 - e).powi(2) / e;
    }
    let dof = observed.len() - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(PoissonFit { statistic, degrees_of_freedom: dof, p_value: chi.sf(statistic) })
}
