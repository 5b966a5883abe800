//! Exact transition probabilities for the totally asymmetric simple exclusion
//! process with second class particles.
//!
//! The crate builds the Bethe-ansatz amplitude matrices, evaluates the
//! contour-integral formulas for the event that the first class particle is
//! the leftmost particle, checks the underlying algebraic identities in exact
//! rational arithmetic, and simulates the process for Monte Carlo comparison.

pub mod bethe;
pub mod cli;
pub mod combinatorics;
pub mod contour;
pub mod error;
pub mod formulas;
pub mod identities;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
