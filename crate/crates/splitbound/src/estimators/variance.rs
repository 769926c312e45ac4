use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::splitting::RegenerationLedger;

const GROUPS: usize = 20;
const Z95: f64 = 1.96;
/// Regeneration estimates need at least this many pooled blocks.
pub const MIN_REGEN_BLOCKS: usize = 1000;
/// Batch means need trajectories at least this many batches long.
pub const MIN_BATCHES_PER_RUN: usize = 100;

/// A point estimate with a delete-a-group jackknife 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jackknifed {
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub units: usize,
}

/// Asymptotic variance per original time step by two methods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub sigma2_regen: f64,
    pub ci_halfwidth_regen: f64,
    pub sigma2_batch: f64,
    pub ci_halfwidth_batch: f64,
    /// `1 / mean block length` on the skeleton.
    pub pi_theta_hat: f64,
    pub blocks: usize,
    pub batches: usize,
    pub n_batch: usize,
}

/// Additive per-group sums; every estimator here is a smooth function of them,
/// so leave-one-group-out values come from subtraction.
#[derive(Clone, Copy, Default)]
struct Acc([f64; 10]);

impl std::ops::Sub for Acc {
    type Output = Acc;
    fn sub(mut self, o: Acc) -> Acc {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a -= b;
        }
        self
    }
}

impl std::ops::AddAssign for Acc {
    fn add_assign(&mut self, o: Acc) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

fn jackknife(groups: &[Acc], stat: impl Fn(&Acc) -> f64) -> (f64, f64) {
    let mut total = Acc::default();
    for g in groups {
        total += *g;
    }
    let full = stat(&total);
    let k = groups.len() as f64;
    if groups.len() < 2 {
        return (full, f64::INFINITY);
    }
    let loo: Vec<f64> = groups.iter().map(|g| stat(&(total - *g))).collect();
    let mean = loo.iter().sum::<f64>() / k;
    let var = (k - 1.0) / k * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (full, Z95 * var.sqrt())
}

/// Regenerative estimate `E c^2 (+ 2 E c_i c_{i+1} when m > 1) / (m E len)`
/// with block sums recentred by the ratio mean, `c_i = s_i - mu m len_i`.
/// Returns the estimate and `1 / mean length`.
pub fn regeneration_sigma2(ledgers: &[RegenerationLedger]) -> Result<(Jackknifed, f64), EstimatorError> {
    let blocks: usize = ledgers.iter().map(|l| l.n_blocks()).sum();
    if blocks < MIN_REGEN_BLOCKS {
        return Err(EstimatorError::InsufficientData { what: "regeneration blocks", have: blocks, need: MIN_REGEN_BLOCKS });
    }
    let m = ledgers[0].m;
    if ledgers.iter().any(|l| l.m != m) {
        return Err(EstimatorError::InvalidInput("ledgers mix skeleton lengths".into()));
    }
    let mf = m as f64;
    let per_group = blocks.div_ceil(GROUPS);
    let mut groups = vec![Acc::default(); blocks.div_ceil(per_group)];
    let mut idx = 0;
    for l in ledgers {
        let lens: Vec<f64> = l.block_lengths().into_iter().map(|x| x as f64).collect();
        for (i, (&s, &len)) in l.blocks.iter().zip(&lens).enumerate() {
            let g = &mut groups[idx / per_group].0;
            g[0] += 1.0;
            g[1] += s;
            g[2] += len;
            g[3] += s * s;
            g[4] += s * len;
            g[5] += len * len;
            if m > 1 && i + 1 < lens.len() {
                let (s2, l2) = (l.blocks[i + 1], lens[i + 1]);
                g[6] += 1.0;
                g[7] += s * s2;
                g[8] += s * l2 + len * s2;
                g[9] += len * l2;
            }
            idx += 1;
        }
    }
    let (estimate, ci_halfwidth) = jackknife(&groups, |a| {
        let [n, ss, sl, s2, sxl, l2, np, sp, spl, ll] = a.0;
        let mu = ss / (mf * sl);
        let c2 = (s2 - 2.0 * mu * mf * sxl + mu * mu * mf * mf * l2) / n;
        let cross = if np > 0.0 { (sp - mu * mf * spl + mu * mu * mf * mf * ll) / np } else { 0.0 };
        (c2 + 2.0 * cross) / (mf * sl / n)
    });
    let total: f64 = groups.iter().map(|g| g.0[0]).sum();
    let length: f64 = groups.iter().map(|g| g.0[2]).sum();
    Ok((Jackknifed { estimate, ci_halfwidth, units: blocks }, total / length))
}

/// Non-overlapping batch means of size `n_batch` (a multiple of `m`), built
/// from the skeleton window sums of each ledger.
pub fn batch_means_sigma2(ledgers: &[RegenerationLedger], n_batch: usize) -> Result<Jackknifed, EstimatorError> {
    if ledgers.is_empty() || n_batch == 0 {
        return Err(EstimatorError::InsufficientData { what: "batch-means trajectories", have: 0, need: 1 });
    }
    let m = ledgers[0].m;
    if !n_batch.is_multiple_of(m) {
        return Err(EstimatorError::InvalidInput(format!("batch size {n_batch} is not a multiple of m = {m}")));
    }
    let shortest = ledgers.iter().map(|l| l.n).min().unwrap_or(0);
    if shortest < MIN_BATCHES_PER_RUN * n_batch {
        return Err(EstimatorError::InsufficientData {
            what: "trajectory length for batch means",
            have: shortest,
            need: MIN_BATCHES_PER_RUN * n_batch,
        });
    }
    let k = n_batch / m;
    let sums: Vec<f64> = ledgers.iter().flat_map(|l| l.z.chunks_exact(k).map(|c| c.iter().sum::<f64>())).collect();
    let per_group = sums.len().div_ceil(GROUPS);
    let groups: Vec<Acc> = sums
        .chunks(per_group)
        .map(|c| {
            let mut a = Acc::default();
            a.0[0] = c.len() as f64;
            a.0[1] = c.iter().sum();
            a.0[2] = c.iter().map(|x| x * x).sum();
            a
        })
        .collect();
    let nb = n_batch as f64;
    let (estimate, ci_halfwidth) = jackknife(&groups, |a| {
        let [n, s, s2, ..] = a.0;
        let var = (s2 - s * s / n) / (n - 1.0);
        var / nb
    });
    Ok(Jackknifed { estimate, ci_halfwidth, units: sums.len() })
}

/// `sqrt(n)` rounded to the nearest power of two, then up to a multiple of `m`.
pub fn default_batch_size(n: usize, m: usize) -> usize {
    let p = 2usize.pow(((n as f64).sqrt().log2().round().max(0.0)) as u32);
    p.div_ceil(m) * m
}

/// Both estimators on the same ledgers. `n_batch = None` uses
/// [`default_batch_size`].
pub fn estimate_sigma2(ledgers: &[RegenerationLedger], n_batch: Option<usize>) -> Result<VarianceEstimate, EstimatorError> {
    let (regen, pi_theta_hat) = regeneration_sigma2(ledgers)?;
    let n_batch = n_batch.unwrap_or_else(|| default_batch_size(ledgers[0].n, ledgers[0].m));
    let batch = batch_means_sigma2(ledgers, n_batch)?;
    Ok(VarianceEstimate {
        sigma2_regen: regen.estimate,
        ci_halfwidth_regen: regen.ci_halfwidth,
        sigma2_batch: batch.estimate,
        ci_halfwidth_batch: batch.ci_halfwidth,
        pi_theta_hat,
        blocks: regen.units,
        batches: batch.units,
        n_batch,
    })
}
