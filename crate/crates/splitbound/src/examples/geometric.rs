use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Example, ExampleError, Observable};
use crate::chain::{ChainModel, DriftCertificate, DriftFunction, GeometricMh, Minorizer, Region, SmallSet, State};

/// Metropolis chain on `{0, 1, ...}` with target `(1 - rho) rho^i`, drift
/// function `V(i) = A^{i+1}` and atom `C = {0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricExample {
    pub rho: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub lambda: f64,
    pub b: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub delta: f64,
}

impl GeometricExample {
    pub fn new(rho: f64, a: f64) -> Result<Self, ExampleError> {
        GeometricMh::new(rho)?;
        let upper = 1.0 / rho;
        if !(a > 1.0 && a < upper) {
            return Err(ExampleError::InvalidA { a, upper });
        }
        let lambda = Self::lambda_for(rho, a);
        if lambda <= 0.0 {
            return Err(ExampleError::NegativeLambda(lambda));
        }
        Ok(GeometricExample { rho, a, lambda, b: (a - 1.0) / 2.0, k: a, delta: 1.0 })
    }

    /// `1 - 1/(2A) - rho A / 2 - (1 - rho)/2`, the contraction of `V` off the atom.
    pub fn lambda_for(rho: f64, a: f64) -> f64 {
        1.0 - 1.0 / (2.0 * a) - rho * a / 2.0 - (1.0 - rho) / 2.0
    }

    pub fn chain(&self) -> GeometricMh {
        GeometricMh { rho: self.rho }
    }
}

impl Example for GeometricExample {
    fn name(&self) -> &str {
        "geometric"
    }

    fn model(&self) -> Arc<dyn ChainModel> {
        Arc::new(self.chain())
    }

    fn certificate(&self) -> DriftCertificate {
        DriftCertificate { v: DriftFunction::Exponential { base: self.a }, lambda: self.lambda, b: self.b, k: self.k, m: 1 }
    }

    fn small_set(&self) -> SmallSet {
        SmallSet {
            region: Region::Points { points: BTreeSet::from([0]) },
            m: 1,
            delta: 1.0,
            nu: Minorizer::KernelAt(State::Int(0)),
        }
    }

    fn pi_c(&self) -> f64 {
        1.0 - self.rho
    }

    fn default_start(&self) -> State {
        State::Int(0)
    }

    /// `(1 + i)^s = (log V(i) / log A)^s`.
    fn kappa_scale(&self, s: f64) -> f64 {
        self.a.ln().powf(-s)
    }

    fn pi_g(&self, obs: &Observable) -> Result<f64, ExampleError> {
        let chain = self.chain();
        let mut total = 0.0;
        for i in 0.. {
            let term = chain.pi(i) * obs.eval(State::Int(i));
            total += term;
            if i > 10 && term < 1e-18 * total.abs().max(1e-300) {
                break;
            }
        }
        Ok(total)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain struct")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{verify_drift, verify_minorization};

    #[test]
    fn example_constants() {
        let ex = GeometricExample::new(0.5, 1.2).unwrap();
        assert!((ex.lambda - 1.0 / 30.0).abs() < 1e-15);
        assert!((ex.b - 0.1).abs() < 1e-15);
        assert_eq!(ex.k, 1.2);
        assert_eq!(ex.pi_c(), 0.5);
    }

    #[test]
    fn a_outside_range_is_rejected() {
        assert!(matches!(GeometricExample::new(0.5, 2.0), Err(ExampleError::InvalidA { .. })));
        assert!(matches!(GeometricExample::new(0.5, 1.0), Err(ExampleError::InvalidA { .. })));
        // lambda tends to 0 as A approaches 1 from above
        assert!(GeometricExample::lambda_for(0.5, 1.0 + 1e-9).abs() < 1e-9);
    }

    #[test]
    fn drift_holds_up_to_500_by_exact_summation() {
        let ex = GeometricExample::new(0.5, 1.2).unwrap();
        let grid: Vec<State> = (0..=500).map(State::Int).collect();
        let cert = ex.certificate();
        let set = ex.small_set();
        let rep = verify_drift(ex.model().as_ref(), &cert, &set.region, &grid).unwrap();
        assert!(rep.pass, "{}", rep.max_scaled_violation);
        assert!(rep.max_scaled_violation <= 1e-12);
        let mrep = verify_minorization(ex.model().as_ref(), &set, &grid[..1]).unwrap();
        assert!(mrep.pass);
    }

    #[test]
    fn kappa_wiring_matches_log_v() {
        let ex = GeometricExample::new(0.5, 1.2).unwrap();
        let obs = Observable { kappa: 1.7, s: 1.5 };
        let v = DriftFunction::Exponential { base: 1.2 };
        for i in 0..50 {
            let x = State::Int(i);
            let lhs = obs.eval(x);
            let rhs = obs.kappa * ex.kappa_scale(obs.s) * v.eval(x).ln().powf(obs.s);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        }
    }

    #[test]
    fn stationary_mean_of_identity() {
        let ex = GeometricExample::new(0.5, 1.2).unwrap();
        // E(1 + X) for X geometric with ratio 1/2 is 2.
        let m = ex.pi_g(&Observable { kappa: 1.0, s: 1.0 }).unwrap();
        assert!((m - 2.0).abs() < 1e-14);
    }
}
