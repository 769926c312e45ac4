//! Regenerative splitting of Markov chains and explicit, computable tail
//! bounds for their additive functionals.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] holds quadrature, root finding, the Gamma function and
//!   per-replica random streams.
//! * [`chain`] describes chain models, small sets and drift certificates,
//!   and checks drift/minorization numerically.
//! * [`splitting`] simulates the split chain and extracts regeneration
//!   ledgers.
//! * [`constants`] turns certificates into Orlicz-norm constants.
//! * [`bounds`] evaluates tail-bound curves; families are looked up by name
//!   in a [`bounds::BoundRegistry`].
//! * [`examples`] builds the two worked chains (geometric target on the
//!   integers and a log-concave-in-tails target on the line).
//! * [`estimators`] contains the Monte Carlo side: Orlicz norm estimation,
//!   empirical tails, variance estimation and domination verdicts.

pub mod bounds;
pub mod chain;
pub mod constants;
pub mod estimators;
pub mod examples;
pub mod numerics;
pub mod splitting;

pub use chain::{ChainModel, State, StateSpace};
