//! The two worked chains and their certificates.
//!
//! [`GeometricExample`] is a Metropolis chain on the non-negative integers
//! with a geometric target; [`LogConcaveExample`] is a random-walk Metropolis
//! chain on the line whose target has log-concave tails. Both implement
//! [`Example`], and [`ExampleRegistry`] builds them from a JSON parameter
//! object by name.

mod geometric;
mod logconcave;
mod registry;
mod scan;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundError;
use crate::chain::{ChainError, ChainModel, DriftCertificate, SmallSet, State};
use crate::constants::{
    certify_geometric, BlockNormSet, ConstantsError, GeometricDrift, GeometricInputs, PiThetaChoice, StartPoint,
};
use crate::numerics::QuadratureError;

pub use geometric::GeometricExample;
pub use logconcave::{drift_constants, LogConcaveExample};
pub use registry::{logconcave_components, ExampleFactory, ExampleRegistry};
pub use scan::{scan_xstar, ScanRequest, ScanResult, ScanRow};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExampleError {
    #[error("A = {a} must lie in (1, 1/rho) = (1, {upper})")]
    InvalidA { a: f64, upper: f64 },
    #[error("drift rate lambda = {0} is not positive")]
    NegativeLambda(f64),
    #[error("x* = {x_star} lies below the tail threshold {threshold} of the target")]
    BelowTailThreshold { x_star: f64, threshold: f64 },
    #[error("no feasible x* in the grid")]
    AllInfeasible,
    #[error("unknown example {0}")]
    UnknownExample(String),
    #[error("bad parameters for {name}: {message}")]
    BadParameters { name: String, message: String },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// The additive functional `g(x) = kappa (1 + |x|)^s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observable {
    pub kappa: f64,
    pub s: f64,
}

impl Observable {
    pub fn eval(&self, x: State) -> f64 {
        self.kappa * (1.0 + x.value().abs()).powf(self.s)
    }

    pub fn alpha(&self) -> f64 {
        1.0 / (self.s + 1.0)
    }
}

/// A chain together with a verified-by-construction drift and small set.
pub trait Example: Send + Sync {
    fn name(&self) -> &str;
    fn model(&self) -> Arc<dyn ChainModel>;
    fn certificate(&self) -> DriftCertificate;
    fn small_set(&self) -> SmallSet;
    fn pi_c(&self) -> f64;
    fn default_start(&self) -> State;

    /// Factor `k` with `|g| <= k kappa (log V)^s` for the observable.
    fn kappa_scale(&self, s: f64) -> f64;

    /// Stationary mean of the observable.
    fn pi_g(&self, obs: &Observable) -> Result<f64, ExampleError>;

    /// The constants as parameters for JSON output.
    fn describe(&self) -> serde_json::Value;

    fn drift(&self) -> GeometricDrift {
        let c = self.certificate();
        GeometricDrift { lambda: c.lambda, b: c.b, k: c.k }
    }

    fn start_point(&self, x: State) -> StartPoint {
        StartPoint { v_x: self.certificate().v.eval(x), in_c: self.small_set().contains(x) }
    }

    fn geometric_inputs(&self, obs: &Observable, start: State, pi_theta: PiThetaChoice) -> GeometricInputs {
        GeometricInputs {
            drift: self.drift(),
            delta: self.small_set().delta,
            pi_c: self.pi_c(),
            start: self.start_point(start),
            kappa: obs.kappa * self.kappa_scale(obs.s),
            s: obs.s,
            pi_theta,
        }
    }

    fn certify(&self, obs: &Observable, start: State, pi_theta: PiThetaChoice) -> Result<BlockNormSet, ExampleError> {
        Ok(certify_geometric(&self.geometric_inputs(obs, start, pi_theta))?)
    }
}
