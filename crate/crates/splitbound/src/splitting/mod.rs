//! Split-chain simulation and regeneration ledgers.
//!
//! [`SplitSampler`] simulates the pair `(X, Y)` where `Y_k = 1` marks a
//! regeneration at skeleton time `k` (state `X_{km}`). [`extract_ledger`]
//! turns a trajectory into the decomposition of an additive functional into
//! an initial piece, a sum of regeneration blocks and an overshoot.

mod dependence;
mod ledger;
mod sampler;

use thiserror::Error;

use crate::chain::{ChainError, State};

pub use dependence::{block_dependence_report, dependence_from_sequences, DependenceReport, MIN_BLOCKS};
pub use ledger::{extract_ledger, read_ledger_csv, simulate_ledger, write_ledger_csv, LedgerHeader, RegenerationLedger};
pub use sampler::{simulate_direct, simulate_split, SplitSampler, SplitTrajectory};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("residual kernel is negative at state {state}: delta nu / P = {ratio}")]
    ResidualKernelNegative { state: State, ratio: f64 },
    #[error("no regeneration covering time {needed} within {length} steps")]
    NoRegeneration { needed: usize, length: usize },
    #[error("n = {n} is not a multiple of m = {m}")]
    NotMultiple { n: usize, m: usize },
    #[error("only {found} blocks available, at least {required} needed")]
    InsufficientBlocks { found: usize, required: usize },
    #[error("trajectory has {have} steps but {need} were requested")]
    TooShort { have: usize, need: usize },
    #[error("ledger i/o: {0}")]
    Io(String),
}
