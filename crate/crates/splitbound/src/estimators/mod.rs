//! Monte Carlo estimators used to check the bounds against simulation.

mod variance;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::TailBoundCurve;
use crate::numerics::{replica_rng, ReplicaRng};

pub use variance::{
    batch_means_sigma2, default_batch_size, estimate_sigma2, regeneration_sigma2, Jackknifed, VarianceEstimate,
    MIN_BATCHES_PER_RUN, MIN_REGEN_BLOCKS,
};

/// Fewest samples accepted by [`estimate_psi_alpha`].
pub const MIN_PSI_SAMPLES: usize = 100;
/// Fewest replicas accepted by [`empirical_tail`].
pub const MIN_TAIL_REPLICAS: usize = 1000;
/// Allowance, in standard errors, of a domination verdict.
pub const VERDICT_STDERRS: f64 = 3.0;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EstimatorError {
    #[error("insufficient data: {what} (have {have}, need {need})")]
    InsufficientData { what: &'static str, have: usize, need: usize },
    #[error("no scale below {limit} makes the sample's psi_alpha mean at most 2")]
    Unbounded { limit: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Runs `f(index, rng)` for each replica on its own stream of `seed`,
/// returning results in replica order regardless of scheduling.
pub fn replicate<T, F>(seed: u64, replicas: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ReplicaRng) -> T + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

fn orlicz_mean(samples: &[f64], alpha: f64, c: f64) -> f64 {
    samples.iter().map(|x| (x.abs() / c).powf(alpha).exp()).sum::<f64>() / samples.len() as f64
}

/// Smallest `c` with `mean exp(|x / c|^alpha) <= 2`, to relative accuracy
/// 1e-6 (the returned value always satisfies the inequality).
pub fn estimate_psi_alpha(samples: &[f64], alpha: f64) -> Result<f64, EstimatorError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(EstimatorError::InvalidInput(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    if samples.len() < MIN_PSI_SAMPLES {
        return Err(EstimatorError::InsufficientData { what: "psi_alpha samples", have: samples.len(), need: MIN_PSI_SAMPLES });
    }
    let top = samples.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if top == 0.0 {
        return Ok(0.0);
    }
    if !top.is_finite() {
        return Err(EstimatorError::InvalidInput("non-finite sample".into()));
    }
    // Below `lo` the largest sample alone pushes the mean past 2.
    let mut lo = top / (2.0 * samples.len() as f64).ln().powf(1.0 / alpha);
    let mut hi = 1e9 * top;
    if orlicz_mean(samples, alpha, hi) > 2.0 {
        return Err(EstimatorError::Unbounded { limit: hi });
    }
    while hi / lo - 1.0 > 1e-9 {
        let mid = (lo * hi).sqrt();
        if orlicz_mean(samples, alpha, mid) <= 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Survival function `P(X > t)` of replica values on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    pub grid: Vec<f64>,
    pub prob: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replicas: usize,
}

pub fn empirical_tail(values: &[f64], grid: &[f64]) -> Result<EmpiricalTail, EstimatorError> {
    if values.len() < MIN_TAIL_REPLICAS {
        return Err(EstimatorError::InsufficientData { what: "tail replicas", have: values.len(), need: MIN_TAIL_REPLICAS });
    }
    if values.iter().any(|v| v.is_nan()) || grid.iter().any(|v| v.is_nan()) {
        return Err(EstimatorError::InvalidInput("NaN in tail input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let prob: Vec<f64> = grid.iter().map(|t| (sorted.len() - sorted.partition_point(|v| v <= t)) as f64 / r).collect();
    let stderr = prob.iter().map(|p| (p * (1.0 - p) / r).sqrt()).collect();
    Ok(EmpiricalTail { grid, prob, stderr, replicas: values.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub t: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `bound + 3 stderr - empirical`
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub family: String,
    pub worst_margin: f64,
    pub worst_t: f64,
    /// Grid points at or above the curve's validity threshold.
    pub checked: usize,
    pub rows: Vec<VerdictRow>,
}

/// PASS iff the empirical tail stays below the curve plus three standard
/// errors at every grid point where the curve applies. Grid values are
/// deviations, converted through the curve's deviation scale.
pub fn domination_verdict(tail: &EmpiricalTail, curve: &TailBoundCurve) -> Verdict {
    let mut rows = Vec::with_capacity(tail.grid.len());
    let mut worst = (f64::INFINITY, f64::NAN);
    let mut checked = 0;
    for ((&t, &p), &se) in tail.grid.iter().zip(&tail.prob).zip(&tail.stderr) {
        let bound = curve.at_deviation(t);
        let margin = bound + VERDICT_STDERRS * se - p;
        if t / curve.deviation_scale >= curve.valid_from {
            checked += 1;
            if margin < worst.0 {
                worst = (margin, t);
            }
        }
        rows.push(VerdictRow { t, empirical: p, stderr: se, bound, margin });
    }
    Verdict { pass: worst.0 >= 0.0, family: curve.family.clone(), worst_margin: worst.0, worst_t: worst.1, checked, rows }
}

/// `exp(lambda^alpha sum (|Y_i| + E|Y_i|)^alpha)` with `Y_i = xi_i 1{|xi_i| > M}`,
/// `M = c (3 alpha^{-2} log n)^{1/alpha}` and `lambda = 1 / (2^{1/alpha} c)`.
/// `mean_abs_y` is the exact `E|Y_i|`.
pub fn truncation_moment(xi: &[f64], c: f64, alpha: f64, mean_abs_y: f64) -> f64 {
    let big_m = crate::bounds::truncation_level(c, alpha, xi.len() as f64);
    let lam = 1.0 / (2f64.powf(1.0 / alpha) * c);
    let s: f64 = xi
        .iter()
        .map(|x| {
            let y = if x.abs() > big_m { x.abs() } else { 0.0 };
            (y + mean_abs_y).powf(alpha)
        })
        .sum();
    (lam.powf(alpha) * s).exp()
}
