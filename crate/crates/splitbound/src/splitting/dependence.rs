use rand::seq::SliceRandom;
use serde::Serialize;

use super::{RegenerationLedger, SplitError};
use crate::numerics::replica_rng;

/// Fewest pooled blocks accepted by the dependence report.
pub const MIN_BLOCKS: usize = 1000;
const PERMUTATIONS: u64 = 199;
const MAX_LAG: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct DependenceReport {
    pub blocks: usize,
    /// `(k, corr_k)` for `k = 1..=5`, pooled within sequences.
    pub lag_correlations: Vec<(usize, f64)>,
    /// `3 / sqrt(blocks)`
    pub threshold: f64,
    /// Permutation p-value of `max_{k >= 2} |corr_k|`.
    pub permutation_p_value: f64,
}

impl DependenceReport {
    pub fn lag(&self, k: usize) -> f64 {
        self.lag_correlations[k - 1].1
    }
}

fn lag_correlations(seqs: &[Vec<f64>]) -> Vec<f64> {
    let count: usize = seqs.iter().map(|s| s.len()).sum();
    let mean = seqs.iter().flatten().sum::<f64>() / count as f64;
    let var = seqs.iter().flatten().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64;
    (1..=MAX_LAG)
        .map(|k| {
            let mut acc = 0.0;
            let mut pairs = 0usize;
            for s in seqs {
                for w in s.windows(k + 1) {
                    acc += (w[0] - mean) * (w[k] - mean);
                    pairs += 1;
                }
            }
            if pairs == 0 || var == 0.0 {
                0.0
            } else {
                acc / pairs as f64 / var
            }
        })
        .collect()
}

fn far_lag_stat(c: &[f64]) -> f64 {
    c[1..].iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Lag correlations and a permutation test on arbitrary block sequences.
/// Permutations shuffle within each sequence, using streams of `seed`.
pub fn dependence_from_sequences(seqs: &[Vec<f64>], seed: u64) -> Result<DependenceReport, SplitError> {
    let blocks: usize = seqs.iter().map(|s| s.len()).sum();
    if blocks < MIN_BLOCKS {
        return Err(SplitError::InsufficientBlocks { found: blocks, required: MIN_BLOCKS });
    }
    let corr = lag_correlations(seqs);
    let observed = far_lag_stat(&corr);
    let mut work: Vec<Vec<f64>> = seqs.to_vec();
    let mut exceed = 0u64;
    for p in 0..PERMUTATIONS {
        let mut rng = replica_rng(seed, p);
        for s in work.iter_mut() {
            s.shuffle(&mut rng);
        }
        if far_lag_stat(&lag_correlations(&work)) >= observed {
            exceed += 1;
        }
    }
    Ok(DependenceReport {
        blocks,
        lag_correlations: corr.into_iter().enumerate().map(|(i, c)| (i + 1, c)).collect(),
        threshold: 3.0 / (blocks as f64).sqrt(),
        permutation_p_value: (1 + exceed) as f64 / (PERMUTATIONS + 1) as f64,
    })
}

/// Dependence report on the block sums of a batch of ledgers.
pub fn block_dependence_report(ledgers: &[RegenerationLedger], seed: u64) -> Result<DependenceReport, SplitError> {
    let seqs: Vec<Vec<f64>> = ledgers.iter().map(|l| l.blocks.clone()).collect();
    dependence_from_sequences(&seqs, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn ar1_stream_shows_lag_two_dependence() {
        let mut rng = replica_rng(8, 0);
        let mut x = 0.0;
        let seq: Vec<f64> = (0..5000)
            .map(|_| {
                x = 0.5 * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let rep = dependence_from_sequences(&[seq], 1).unwrap();
        assert!(rep.lag(2).abs() > rep.threshold);
        assert!((rep.lag(2) - 0.25).abs() < 0.06);
        assert!(rep.permutation_p_value <= 0.01);
    }

    #[test]
    fn iid_stream_passes() {
        let mut rng = replica_rng(8, 1);
        let seq: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let rep = dependence_from_sequences(&[seq], 2).unwrap();
        assert!(rep.lag(2).abs() < rep.threshold);
    }

    #[test]
    fn too_few_blocks() {
        assert!(matches!(dependence_from_sequences(&[vec![1.0; 10]], 0), Err(SplitError::InsufficientBlocks { found: 10, .. })));
    }
}
