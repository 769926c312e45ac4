use std::io::{Read, Write};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::sampler::{SplitSampler, SplitTrajectory};
use super::SplitError;
use crate::chain::{ChainModel, SmallSet, State};

/// Decomposition of `sum_{k<n} f(X_k)` along one split trajectory.
///
/// With `sigma(i)` the successive regeneration times of the skeleton and
/// `N` the first index with `m sigma(N) + m - 1 >= n - 1`:
///
/// ```text
/// sum_{k<n} f(X_k) = head + sum_{i<N} s_i - tail
/// ```
///
/// where `head` runs over `0 ..= min(m sigma(0) + m - 1, n - 1)` and `tail`
/// over `n ..= m sigma(N) + m - 1` (empty when `N = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegenerationLedger {
    pub n: usize,
    pub m: usize,
    pub seed: Option<u64>,
    /// `sigma(0) ..= sigma(N)`
    pub sigma: Vec<usize>,
    /// `s_0 .. s_{N-1}`
    pub blocks: Vec<f64>,
    /// `Z_0 .. Z_{n/m - 1}`, sums of `f` over consecutive skeleton windows.
    pub z: Vec<f64>,
    pub head: f64,
    pub tail: f64,
    /// `sum_{k<n} f(X_k)`
    pub total: f64,
}

impl RegenerationLedger {
    /// `N`, the number of complete blocks used.
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }
    pub fn u(&self) -> f64 {
        self.head.abs()
    }
    /// Signed block sum.
    pub fn v(&self) -> f64 {
        self.blocks.iter().sum()
    }
    pub fn w(&self) -> f64 {
        self.tail.abs()
    }
    /// Skeleton lengths `sigma(i+1) - sigma(i)` of the blocks.
    pub fn block_lengths(&self) -> Vec<usize> {
        self.sigma.windows(2).map(|w| w[1] - w[0]).collect()
    }
    pub fn header(&self) -> LedgerHeader {
        LedgerHeader { n: self.n, m: self.m, seed: self.seed, big_n: self.n_blocks(), u: self.u(), v: self.v(), w: self.w(), total: self.total }
    }
}

/// JSON header written next to a ledger CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerHeader {
    pub n: usize,
    pub m: usize,
    pub seed: Option<u64>,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub total: f64,
}

/// Builds the ledger of `f` over the first `n` states of `traj`.
pub fn extract_ledger(traj: &SplitTrajectory, f: &dyn Fn(State) -> f64, n: usize) -> Result<RegenerationLedger, SplitError> {
    let m = traj.m;
    if n == 0 || !n.is_multiple_of(m) {
        return Err(SplitError::NotMultiple { n, m });
    }
    if traj.len() < n {
        return Err(SplitError::TooShort { have: traj.len(), need: n });
    }
    let xs = traj.states();
    let regen = traj.regenerations();
    let cover = |k: usize| m * k + m - 1;
    let first = *regen.first().ok_or(SplitError::NoRegeneration { needed: 0, length: traj.len() })?;
    let big_n = regen
        .iter()
        .position(|&k| cover(k) >= n - 1)
        .ok_or(SplitError::NoRegeneration { needed: n - 1, length: traj.len() })?;
    let sigma: Vec<usize> = regen[..=big_n].to_vec();

    let fx: Vec<f64> = xs[..=cover(sigma[big_n]).max(n - 1)].iter().map(|s| f(*s)).collect();
    let sum = |a: usize, b: usize| fx[a..=b].iter().sum::<f64>();

    let head = sum(0, cover(first).min(n - 1));
    let blocks: Vec<f64> = sigma.windows(2).map(|w| sum(m * (w[0] + 1), cover(w[1]))).collect();
    let tail = if big_n > 0 && cover(sigma[big_n]) >= n { sum(n, cover(sigma[big_n])) } else { 0.0 };
    let z: Vec<f64> = (0..n / m).map(|j| sum(j * m, j * m + m - 1)).collect();
    let total = fx[..n].iter().sum();
    Ok(RegenerationLedger { n, m, seed: None, sigma, blocks, z, head, tail, total })
}

/// Simulates a split chain from `start` and extracts the ledger of `f` over
/// `n` steps. The trajectory starts at length `2n` and is doubled (at most
/// six times) until a regeneration covers time `n - 1`.
pub fn simulate_ledger(
    model: &dyn ChainModel,
    set: &SmallSet,
    f: &dyn Fn(State) -> f64,
    n: usize,
    start: State,
    rng: &mut dyn RngCore,
) -> Result<RegenerationLedger, SplitError> {
    let mut sampler = SplitSampler::new(model, set)?;
    let mut traj = sampler.simulate(2 * n, start, rng)?;
    let mut doublings = 0;
    loop {
        match extract_ledger(&traj, f, n) {
            Err(SplitError::NoRegeneration { .. }) if doublings < 6 => {
                let more = traj.levels.len();
                sampler.extend(&mut traj, more, rng)?;
                doublings += 1;
            }
            other => return other,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BlockRow {
    replica: usize,
    i: usize,
    sigma: usize,
    s: f64,
}

/// Writes one row per block (`replica, i, sigma, s`) for every ledger.
pub fn write_ledger_csv<W: Write>(out: W, ledgers: &[RegenerationLedger]) -> Result<(), SplitError> {
    let mut w = csv::Writer::from_writer(out);
    for (replica, l) in ledgers.iter().enumerate() {
        for (i, s) in l.blocks.iter().enumerate() {
            w.serialize(BlockRow { replica, i, sigma: l.sigma[i], s: *s }).map_err(|e| SplitError::Io(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| SplitError::Io(e.to_string()))
}

/// Reads block sums back, grouped by replica.
pub fn read_ledger_csv<R: Read>(input: R) -> Result<Vec<Vec<(usize, f64)>>, SplitError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out: Vec<Vec<(usize, f64)>> = Vec::new();
    for row in r.deserialize::<BlockRow>() {
        let row = row.map_err(|e| SplitError::Io(e.to_string()))?;
        if out.len() <= row.replica {
            out.resize(row.replica + 1, Vec::new());
        }
        out[row.replica].push((row.sigma, row.s));
    }
    Ok(out)
}
