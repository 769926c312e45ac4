//! Chain models, small sets, drift certificates and their numerical checks.
//!
//! A model is anything implementing [`ChainModel`]. Lattice models expose
//! finite transition rows, which makes every kernel computation exact; models
//! on the real line fall back to adaptive quadrature.

mod lattice;
mod real;
mod verify;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::QuadratureError;

pub use lattice::{m_step_distribution, GeometricMh, MatrixChain};
pub use real::{GaussianIncrement, GaussianTarget, Increment, LaplaceIncrement, RealMh, Target};
pub use verify::{
    default_grid, verify_drift, verify_minorization, DriftReport, DriftRow, MinorizationReport,
    DRIFT_TOL_EXACT, DRIFT_TOL_QUADRATURE, MINORIZATION_TOL,
};

/// A point of the state space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum State {
    Int(i64),
    Real(f64),
}

impl State {
    /// Numeric value of the state, used by functionals such as `g(x) = x`.
    pub fn value(self) -> f64 {
        match self {
            State::Int(i) => i as f64,
            State::Real(x) => x,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            State::Int(i) => Some(i),
            State::Real(_) => None,
        }
    }
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            State::Int(i) => write!(f, "{i}"),
            State::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpace {
    IntegerLattice,
    RealLine,
}

/// Result of one kernel move. `moved` is false when a proposal was rejected
/// and the chain stayed put; on the real line this distinguishes the atom of
/// the kernel at the current point from its absolutely continuous part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub next: State,
    pub moved: bool,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ChainError {
    #[error(transparent)]
    QuadratureFailure(#[from] QuadratureError),
    #[error("state {0} is outside the state space of the model")]
    OutsideStateSpace(State),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

/// A Markov transition kernel that can be simulated and integrated against.
pub trait ChainModel: Send + Sync {
    fn name(&self) -> &str;
    fn state_space(&self) -> StateSpace;
    fn contains(&self, x: State) -> bool;

    /// Draw `X_{k+1}` given `X_k = x`.
    fn transition(&self, x: State, rng: &mut dyn RngCore) -> Transition;

    fn step(&self, x: State, rng: &mut dyn RngCore) -> State {
        self.transition(x, rng).next
    }

    /// Finite support of `P(x, .)` on the lattice, `None` on the real line.
    fn row(&self, _x: i64) -> Option<Vec<(i64, f64)>> {
        None
    }

    /// `P(x, {y})` on the lattice; on the real line the density at `y` of the
    /// part of `P(x, .)` reached by an accepted move.
    fn transition_density(&self, x: State, y: State) -> f64;

    /// `E_x h(X_1)`.
    fn expect(&self, x: State, h: &dyn Fn(State) -> f64) -> Result<f64, ChainError>;

    /// `P(x, [lo, hi])`.
    fn prob_interval(&self, x: State, lo: f64, hi: f64) -> Result<f64, ChainError>;
}

/// Lyapunov function of a drift certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftFunction {
    /// `V(n) = base^(n+1)` on the non-negative integers.
    Exponential { base: f64 },
    /// `V(x) = exp(|x| + 1)` on the line.
    ExpAbs,
    /// `V(i) = values[i]` for a finite chain.
    Table { values: Vec<f64> },
}

impl DriftFunction {
    pub fn eval(&self, x: State) -> f64 {
        match self {
            DriftFunction::Exponential { base } => base.powf(x.value() + 1.0),
            DriftFunction::ExpAbs => (x.value().abs() + 1.0).exp(),
            DriftFunction::Table { values } => {
                let i = x.value() as usize;
                values.get(i).copied().unwrap_or(f64::INFINITY)
            }
        }
    }
}

/// Geometric drift `P^m V - V <= -lambda V + b 1_C` with `K = sup_C V`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftCertificate {
    pub v: DriftFunction,
    pub lambda: f64,
    pub b: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub m: usize,
}

impl DriftCertificate {
    pub fn validate(&self) -> Result<(), ChainError> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(ChainError::InvalidModel(format!("drift rate lambda = {} must lie in (0, 1]", self.lambda)));
        }
        if !(self.b >= 0.0) || !(self.k >= 1.0) || self.m == 0 {
            return Err(ChainError::InvalidModel(format!(
                "drift constants need b >= 0, K >= 1, m >= 1 (got b = {}, K = {}, m = {})",
                self.b, self.k, self.m
            )));
        }
        Ok(())
    }
}

/// The set `C` of a small-set condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Points { points: BTreeSet<i64> },
    Interval { lo: f64, hi: f64 },
}

impl Region {
    pub fn contains(&self, x: State) -> bool {
        match (self, x) {
            (Region::Points { points }, State::Int(i)) => points.contains(&i),
            (Region::Interval { lo, hi }, s) => {
                let v = s.value();
                v >= *lo && v <= *hi
            }
            (Region::Points { .. }, State::Real(_)) => false,
        }
    }
}

/// The minorizing probability `nu`.
#[derive(Clone)]
pub enum Minorizer {
    /// `nu = P^m(x0, .)`; sampled by running the chain from `x0`.
    KernelAt(State),
    /// Explicit probability mass function on the lattice.
    Pmf(Vec<(i64, f64)>),
    /// `nu = pi( . | [lo, hi])` for a target with known normalisation.
    TargetRestricted { target: Arc<dyn Target>, lo: f64, hi: f64 },
}

impl std::fmt::Debug for Minorizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Minorizer::KernelAt(x) => write!(f, "KernelAt({x})"),
            Minorizer::Pmf(p) => write!(f, "Pmf({p:?})"),
            Minorizer::TargetRestricted { lo, hi, .. } => write!(f, "TargetRestricted[{lo}, {hi}]"),
        }
    }
}

impl Minorizer {
    pub fn sample(&self, model: &dyn ChainModel, m: usize, rng: &mut dyn RngCore) -> State {
        match self {
            Minorizer::KernelAt(x0) => {
                let mut x = *x0;
                for _ in 0..m {
                    x = model.step(x, rng);
                }
                x
            }
            Minorizer::Pmf(p) => State::Int(lattice::sample_row(p, rng)),
            Minorizer::TargetRestricted { target, lo, hi } => State::Real(target.sample_between(*lo, *hi, rng)),
        }
    }

    /// Mass (lattice) or density (line) of `nu` at `y`.
    pub fn mass(&self, model: &dyn ChainModel, m: usize, y: State) -> Result<f64, ChainError> {
        match self {
            Minorizer::KernelAt(x0) => match (x0, y) {
                (State::Int(a), State::Int(b)) => {
                    Ok(m_step_distribution(model, *a, m)?.get(&b).copied().unwrap_or(0.0))
                }
                _ => Err(ChainError::Unsupported("kernel minorizer off the lattice".into())),
            },
            Minorizer::Pmf(p) => {
                let yi = y.as_int();
                Ok(p.iter().filter(|(s, _)| Some(*s) == yi).map(|(_, w)| *w).sum())
            }
            Minorizer::TargetRestricted { target, lo, hi } => {
                let v = y.value();
                if v < *lo || v > *hi {
                    Ok(0.0)
                } else {
                    Ok(target.density(v) / target.mass(*lo, *hi))
                }
            }
        }
    }

    /// `nu([lo, hi])`.
    pub fn measure(&self, model: &dyn ChainModel, m: usize, lo: f64, hi: f64) -> Result<f64, ChainError> {
        match self {
            Minorizer::KernelAt(x0) => match x0 {
                State::Int(a) => Ok(m_step_distribution(model, *a, m)?
                    .iter()
                    .filter(|(s, _)| (**s as f64) >= lo && (**s as f64) <= hi)
                    .map(|(_, w)| *w)
                    .sum()),
                State::Real(_) if m == 1 => model.prob_interval(*x0, lo, hi),
                State::Real(_) => Err(ChainError::Unsupported("multi-step kernel minorizer on the line".into())),
            },
            Minorizer::Pmf(p) => Ok(p.iter().filter(|(s, _)| (*s as f64) >= lo && (*s as f64) <= hi).map(|(_, w)| *w).sum()),
            Minorizer::TargetRestricted { target, lo: a, hi: b } => {
                let l = lo.max(*a);
                let h = hi.min(*b);
                if l >= h {
                    Ok(0.0)
                } else {
                    Ok(target.mass(l, h) / target.mass(*a, *b))
                }
            }
        }
    }
}

/// Minorization `P^m(x, .) >= delta nu(.)` for `x` in `region`.
#[derive(Clone, Debug)]
pub struct SmallSet {
    pub region: Region,
    pub m: usize,
    pub delta: f64,
    pub nu: Minorizer,
}

impl SmallSet {
    pub fn contains(&self, x: State) -> bool {
        self.region.contains(x)
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(ChainError::InvalidModel(format!("delta = {} must lie in (0, 1]", self.delta)));
        }
        if self.m == 0 {
            return Err(ChainError::InvalidModel("m must be at least 1".into()));
        }
        Ok(())
    }
}

/// Uniform draw used by the samplers; kept here so every module consumes
/// randomness the same way.
pub(crate) fn uniform(rng: &mut dyn RngCore) -> f64 {
    rng.random::<f64>()
}
