//! Numerical checks of drift and minorization on finite grids.

use serde::Serialize;

use super::{m_step_distribution, ChainError, ChainModel, DriftCertificate, Region, SmallSet, State, StateSpace};

/// Drift tolerance (relative to `max(1, V(x))`) when `P^m V` is an exact finite sum.
pub const DRIFT_TOL_EXACT: f64 = 1e-10;
/// Drift tolerance (relative to `max(1, V(x))`) when `P^m V` comes from quadrature.
pub const DRIFT_TOL_QUADRATURE: f64 = 1e-6;
/// Minorization passes when the smallest slack is at least `-MINORIZATION_TOL`.
pub const MINORIZATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct DriftRow {
    pub state: State,
    pub v: f64,
    pub pmv: f64,
    /// `V - lambda V + b 1_C`
    pub bound: f64,
    /// `(P^m V - bound) / max(1, V)`
    pub scaled_violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub pass: bool,
    pub tolerance: f64,
    pub max_scaled_violation: f64,
    pub worst_state: State,
    pub rows: Vec<DriftRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinorizationReport {
    pub pass: bool,
    pub min_slack: f64,
    pub worst_state: State,
    pub worst_set: (f64, f64),
    pub checks: usize,
}

/// Grid used when the caller does not supply one: `{0..200}` on the lattice
/// (clipped to the state space) and 401 points on `[-2 x*, 2 x*]` on the line,
/// where `x*` is the outer edge of the small set.
pub fn default_grid(model: &dyn ChainModel, region: &Region) -> Vec<State> {
    match model.state_space() {
        StateSpace::IntegerLattice => (0..=200).map(State::Int).filter(|s| model.contains(*s)).collect(),
        StateSpace::RealLine => {
            let edge = match region {
                Region::Interval { lo, hi } => lo.abs().max(hi.abs()),
                Region::Points { points } => points.iter().map(|p| p.abs()).max().unwrap_or(1) as f64,
            };
            let w = 2.0 * edge;
            (0..401).map(|i| State::Real(-w + 2.0 * w * i as f64 / 400.0)).collect()
        }
    }
}

fn pmv(model: &dyn ChainModel, cert: &DriftCertificate, x: State) -> Result<f64, ChainError> {
    if cert.m == 1 {
        return model.expect(x, &|s| cert.v.eval(s));
    }
    match x {
        State::Int(i) => {
            let mut terms: Vec<f64> =
                m_step_distribution(model, i, cert.m)?.into_iter().map(|(s, p)| p * cert.v.eval(State::Int(s))).collect();
            terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
            Ok(terms.iter().sum())
        }
        State::Real(_) => Err(ChainError::Unsupported("multi-step drift on the real line".into())),
    }
}

/// Checks `P^m V(x) - V(x) <= -lambda V(x) + b 1_C(x)` at every grid point.
pub fn verify_drift(
    model: &dyn ChainModel,
    cert: &DriftCertificate,
    region: &Region,
    grid: &[State],
) -> Result<DriftReport, ChainError> {
    let tolerance = match model.state_space() {
        StateSpace::IntegerLattice => DRIFT_TOL_EXACT,
        StateSpace::RealLine => DRIFT_TOL_QUADRATURE,
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &x in grid {
        let v = cert.v.eval(x);
        let p = pmv(model, cert, x)?;
        let b = if region.contains(x) { cert.b } else { 0.0 };
        let bound = (v - cert.lambda * v) + b;
        rows.push(DriftRow { state: x, v, pmv: p, bound, scaled_violation: (p - bound) / v.max(1.0) });
    }
    let worst = rows
        .iter()
        .max_by(|a, b| a.scaled_violation.partial_cmp(&b.scaled_violation).unwrap())
        .ok_or_else(|| ChainError::InvalidModel("empty drift grid".into()))?;
    Ok(DriftReport {
        pass: worst.scaled_violation <= tolerance,
        tolerance,
        max_scaled_violation: worst.scaled_violation,
        worst_state: worst.state,
        rows: rows.clone(),
    })
}

/// Checks `P^m(x, B) >= delta nu(B)` for grid points `x` in `C`.
///
/// On the lattice the test sets are singletons of the support of `nu`, which
/// is equivalent to checking all sets. On the line they are the cells of
/// uniform partitions of `C` into 4, 16 and 64 pieces.
pub fn verify_minorization(model: &dyn ChainModel, set: &SmallSet, grid: &[State]) -> Result<MinorizationReport, ChainError> {
    set.validate()?;
    let mut xs: Vec<State> = grid.iter().copied().filter(|x| set.contains(*x)).collect();
    if let Region::Points { points } = &set.region {
        xs = points.iter().map(|p| State::Int(*p)).collect();
    }
    if xs.is_empty() {
        return Err(ChainError::InvalidModel("no grid point falls inside the small set".into()));
    }
    let mut min_slack = f64::INFINITY;
    let mut worst_state = xs[0];
    let mut worst_set = (0.0, 0.0);
    let mut checks = 0;
    let mut record = |slack: f64, x: State, b: (f64, f64)| {
        checks += 1;
        if slack < min_slack {
            min_slack = slack;
            worst_state = x;
            worst_set = b;
        }
    };
    match model.state_space() {
        StateSpace::IntegerLattice => {
            let nu_support: Vec<i64> = match &set.nu {
                super::Minorizer::KernelAt(State::Int(x0)) => m_step_distribution(model, *x0, set.m)?.keys().copied().collect(),
                super::Minorizer::Pmf(p) => p.iter().map(|(s, _)| *s).collect(),
                _ => return Err(ChainError::Unsupported("real-line minorizer on a lattice model".into())),
            };
            for &x in &xs {
                let i = x.as_int().ok_or(ChainError::OutsideStateSpace(x))?;
                let dist = m_step_distribution(model, i, set.m)?;
                for &y in &nu_support {
                    let p = dist.get(&y).copied().unwrap_or(0.0);
                    let nu = set.nu.mass(model, set.m, State::Int(y))?;
                    record(p - set.delta * nu, x, (y as f64, y as f64));
                }
            }
        }
        StateSpace::RealLine => {
            if set.m != 1 {
                return Err(ChainError::Unsupported("multi-step minorization on the real line".into()));
            }
            let (lo, hi) = match set.region {
                Region::Interval { lo, hi } => (lo, hi),
                Region::Points { .. } => return Err(ChainError::Unsupported("point small set on the real line".into())),
            };
            let mut cells = Vec::new();
            for k in [4usize, 16, 64] {
                let w = (hi - lo) / k as f64;
                cells.extend((0..k).map(|j| (lo + j as f64 * w, lo + (j + 1) as f64 * w)));
            }
            for &x in &xs {
                for &(a, b) in &cells {
                    let p = model.prob_interval(x, a, b)?;
                    let nu = set.nu.measure(model, set.m, a, b)?;
                    record(p - set.delta * nu, x, (a, b));
                }
            }
        }
    }
    Ok(MinorizationReport { pass: min_slack >= -MINORIZATION_TOL, min_slack, worst_state, worst_set, checks })
}
