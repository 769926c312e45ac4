use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{drift_constants, Example, ExampleError, LogConcaveExample, Observable};
use crate::bounds::theorem_a;
use crate::chain::{Increment, State, Target};
use crate::constants::PiThetaChoice;

/// The point `(n, t)` at which candidate `x*` values are compared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRequest {
    pub observable: Observable,
    pub start: f64,
    pub n: f64,
    pub t: f64,
    pub eta: f64,
    pub pi_theta: PiThetaChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x_star: f64,
    pub lambda: f64,
    pub b: f64,
    pub feasible: bool,
    pub delta: Option<f64>,
    /// Clamped bound.
    pub bound: Option<f64>,
    /// Unclamped term sum, used for ranking since the clamp hides differences.
    pub raw: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub best: f64,
    pub rows: Vec<ScanRow>,
}

/// Evaluates the geometric bound for each `x*` in `grid` and returns the one
/// with the smallest unclamped value. Ties go to the smaller `x*`.
pub fn scan_xstar(
    target: Arc<dyn Target>,
    increment: Arc<dyn Increment>,
    grid: &[f64],
    req: &ScanRequest,
) -> Result<ScanResult, ExampleError> {
    let rows: Vec<ScanRow> = grid
        .par_iter()
        .map(|&x| row(target.clone(), increment.clone(), x, req))
        .collect::<Result<_, _>>()?;
    let best = rows
        .iter()
        .filter_map(|r| r.raw.map(|v| (r.x_star, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .ok_or(ExampleError::AllInfeasible)?
        .0;
    Ok(ScanResult { best, rows })
}

fn row(target: Arc<dyn Target>, increment: Arc<dyn Increment>, x: f64, req: &ScanRequest) -> Result<ScanRow, ExampleError> {
    let (lambda, b) = drift_constants(increment.as_ref(), x)?;
    let infeasible = ScanRow { x_star: x, lambda, b, feasible: false, delta: None, bound: None, raw: None };
    let ex = match LogConcaveExample::new(target, increment, x) {
        Ok(ex) => ex,
        Err(ExampleError::NegativeLambda(_) | ExampleError::BelowTailThreshold { .. }) => return Ok(infeasible),
        Err(e) => return Err(e),
    };
    let cert = ex.certify(&req.observable, State::Real(req.start), req.pi_theta)?;
    let curve = theorem_a(&cert, req.n, req.eta)?;
    Ok(ScanRow {
        x_star: x,
        lambda,
        b,
        feasible: true,
        delta: Some(ex.delta),
        bound: Some(curve.evaluate(req.t)),
        raw: Some(curve.raw(req.t)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{GaussianTarget, LaplaceIncrement};

    fn parts() -> (Arc<dyn Target>, Arc<dyn Increment>) {
        (Arc::new(GaussianTarget { scale: 1.0 }), Arc::new(LaplaceIncrement { scale: 1.0 }))
    }

    fn request() -> ScanRequest {
        ScanRequest {
            observable: Observable { kappa: 1.0, s: 1.0 },
            start: 0.0,
            n: 16384.0,
            t: 16384.0,
            eta: 0.5,
            pi_theta: PiThetaChoice::Exact,
        }
    }

    #[test]
    fn single_feasible_point_is_returned() {
        let (t, q) = parts();
        let res = scan_xstar(t, q, &[1.0, 2.0, 3.5], &request()).unwrap();
        assert_eq!(res.best, 3.5);
        assert_eq!(res.rows.iter().filter(|r| r.feasible).count(), 1);
    }

    #[test]
    fn all_infeasible() {
        let (t, q) = parts();
        assert_eq!(scan_xstar(t, q, &[0.5, 1.0], &request()), Err(ExampleError::AllInfeasible));
    }

    #[test]
    fn lambda_rises_and_delta_falls() {
        let (t, q) = parts();
        let grid: Vec<f64> = (0..12).map(|i| 2.5 + 0.25 * i as f64).collect();
        let res = scan_xstar(t, q, &grid, &request()).unwrap();
        for w in res.rows.windows(2) {
            assert!(w[1].lambda > w[0].lambda);
            assert!(w[1].b > w[0].b);
            assert!(w[1].delta.unwrap() < w[0].delta.unwrap());
        }
    }

    #[test]
    fn argmin_stable_under_refinement() {
        let (t, q) = parts();
        let coarse: Vec<f64> = (0..11).map(|i| 2.5 + 0.5 * i as f64).collect();
        let fine: Vec<f64> = (0..21).map(|i| 2.5 + 0.25 * i as f64).collect();
        let a = scan_xstar(t.clone(), q.clone(), &coarse, &request()).unwrap().best;
        let b = scan_xstar(t, q, &fine, &request()).unwrap().best;
        assert!((a - b).abs() <= 0.5 + 1e-12, "{a} vs {b}");
    }
}
