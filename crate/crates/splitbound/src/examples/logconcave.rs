use std::sync::Arc;

use serde_json::json;

use super::{Example, ExampleError, Observable};
use crate::chain::{ChainModel, DriftCertificate, DriftFunction, Increment, Minorizer, RealMh, Region, SmallSet, State, Target};
use crate::numerics::{integrate, integrate_to_infinity};

const TOL: f64 = 1e-13;

/// `(lambda, b)` for `V(x) = exp(|x| + 1)` and the small set `[-x*, x*]`:
///
/// `lambda = int_0^{x*} q(z) (1 - e^{-z})^2 dz - 2 int_{x*}^inf q`,
/// `b = e (1 + 2 int_{x*}^inf q + 2 e^{x*} int_0^{x*} q)`.
///
/// No sign check is made on `lambda`.
pub fn drift_constants(q: &dyn Increment, x_star: f64) -> Result<(f64, f64), ExampleError> {
    let body = integrate(|z| q.density(z) * (1.0 - (-z).exp()).powi(2), 0.0, x_star, TOL)?;
    let tail = integrate_to_infinity(|z| q.density(z), x_star, TOL)?;
    let centre = integrate(|z| q.density(z), 0.0, x_star, TOL)?;
    let lambda = body - 2.0 * tail;
    let b = std::f64::consts::E * (1.0 + 2.0 * tail + 2.0 * x_star.exp() * centre);
    Ok((lambda, b))
}

/// Random-walk Metropolis on the line with `C = [-x*, x*]` and
/// `nu = pi( . | C)`.
///
/// The increment density is assumed symmetric and non-increasing in `|z|`,
/// so its infimum over `C - C` is `q(2 x*)`.
#[derive(Clone)]
pub struct LogConcaveExample {
    pub target: Arc<dyn Target>,
    pub increment: Arc<dyn Increment>,
    pub x_star: f64,
    pub lambda: f64,
    pub b: f64,
    pub k: f64,
    pub delta: f64,
    pub pi_c: f64,
}

impl std::fmt::Debug for LogConcaveExample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LogConcaveExample({}, {}, x* = {})", self.target.name(), self.increment.name(), self.x_star)
    }
}

impl LogConcaveExample {
    pub fn new(target: Arc<dyn Target>, increment: Arc<dyn Increment>, x_star: f64) -> Result<Self, ExampleError> {
        let (lambda, b) = drift_constants(increment.as_ref(), x_star)?;
        if lambda <= 0.0 {
            return Err(ExampleError::NegativeLambda(lambda));
        }
        let threshold = target.tail_threshold();
        if x_star < threshold {
            return Err(ExampleError::BelowTailThreshold { x_star, threshold });
        }
        let delta = Self::delta_for(target.as_ref(), increment.as_ref(), x_star);
        let pi_c = target.mass(-x_star, x_star);
        Ok(LogConcaveExample { target, increment, x_star, lambda, b, k: (x_star + 1.0).exp(), delta, pi_c })
    }

    /// `pi(C) inf_{C x C} q(y - x) / sup_C pi`.
    pub fn delta_for(target: &dyn Target, q: &dyn Increment, x_star: f64) -> f64 {
        target.mass(-x_star, x_star) * q.density(2.0 * x_star) / target.sup_density(-x_star, x_star)
    }

    pub fn chain(&self) -> RealMh {
        RealMh::new(self.target.clone(), self.increment.clone())
    }
}

impl Example for LogConcaveExample {
    fn name(&self) -> &str {
        "logconcave"
    }

    fn model(&self) -> Arc<dyn ChainModel> {
        Arc::new(self.chain())
    }

    fn certificate(&self) -> DriftCertificate {
        DriftCertificate { v: DriftFunction::ExpAbs, lambda: self.lambda, b: self.b, k: self.k, m: 1 }
    }

    fn small_set(&self) -> SmallSet {
        SmallSet {
            region: Region::Interval { lo: -self.x_star, hi: self.x_star },
            m: 1,
            delta: self.delta,
            nu: Minorizer::TargetRestricted { target: self.target.clone(), lo: -self.x_star, hi: self.x_star },
        }
    }

    fn pi_c(&self) -> f64 {
        self.pi_c
    }

    fn default_start(&self) -> State {
        State::Real(0.0)
    }

    /// `log V(x) = 1 + |x|`, so the observable is already in the right form.
    fn kappa_scale(&self, _s: f64) -> f64 {
        1.0
    }

    fn pi_g(&self, obs: &Observable) -> Result<f64, ExampleError> {
        let half = integrate_to_infinity(|x| self.target.density(x) * obs.eval(State::Real(x)), 0.0, 1e-12)?;
        let neg = integrate_to_infinity(|x| self.target.density(-x) * obs.eval(State::Real(-x)), 0.0, 1e-12)?;
        Ok(half + neg)
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "target": self.target.name(),
            "increment": self.increment.name(),
            "x_star": self.x_star,
            "lambda": self.lambda,
            "b": self.b,
            "K": self.k,
            "delta": self.delta,
            "pi_C": self.pi_c,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{default_grid, verify_drift, verify_minorization, GaussianTarget, LaplaceIncrement};

    /// Closed forms for `q(z) = e^{-|z|}/2`.
    fn laplace_oracle(x: f64) -> (f64, f64) {
        let lambda = (1.0 - (-x).exp()).powi(3) / 6.0 - (-x).exp();
        let b = (x.exp() + (-x).exp()) * std::f64::consts::E;
        (lambda, b)
    }

    fn example(x: f64) -> Result<LogConcaveExample, ExampleError> {
        LogConcaveExample::new(Arc::new(GaussianTarget { scale: 1.0 }), Arc::new(LaplaceIncrement { scale: 1.0 }), x)
    }

    #[test]
    fn quadrature_matches_antiderivatives() {
        for x in [2.0, 3.0, 4.0, 5.5] {
            let (l, b) = drift_constants(&LaplaceIncrement { scale: 1.0 }, x).unwrap();
            let (lo, bo) = laplace_oracle(x);
            assert!((l - lo).abs() < 1e-10, "lambda at {x}: {l} vs {lo}");
            assert!((b - bo).abs() < 1e-10, "b at {x}: {b} vs {bo}");
        }
    }

    #[test]
    fn small_x_star_has_negative_drift_rate() {
        assert!(matches!(example(1e-6), Err(ExampleError::NegativeLambda(l)) if (l + 1.0).abs() < 1e-5));
        assert!(matches!(example(2.0), Err(ExampleError::NegativeLambda(_))));
    }

    #[test]
    fn delta_formula() {
        let ex = example(3.0).unwrap();
        let g = GaussianTarget { scale: 1.0 };
        let expect = g.mass(-3.0, 3.0) * 0.5 * (-6f64).exp() / g.density(0.0);
        assert!((ex.delta - expect).abs() < 1e-15);
        assert_eq!(ex.k, 4f64.exp());
    }

    #[test]
    fn certificate_verifies_numerically() {
        for x in [2.5, 3.0, 4.0] {
            let ex = example(x).unwrap();
            let model = ex.model();
            let set = ex.small_set();
            let grid = default_grid(model.as_ref(), &set.region);
            let rep = verify_drift(model.as_ref(), &ex.certificate(), &set.region, &grid).unwrap();
            assert!(rep.pass, "x* = {x}: {}", rep.max_scaled_violation);
            let mrep = verify_minorization(model.as_ref(), &set, &grid).unwrap();
            assert!(mrep.pass, "x* = {x}: {}", mrep.min_slack);
        }
    }

    #[test]
    fn stationary_mean() {
        let ex = example(3.0).unwrap();
        // E(1 + |X|) = 1 + sqrt(2/pi)
        let m = ex.pi_g(&Observable { kappa: 1.0, s: 1.0 }).unwrap();
        assert!((m - 1.0 - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }
}
