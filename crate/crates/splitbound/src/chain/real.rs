use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{uniform, ChainError, ChainModel, State, StateSpace, Transition};
use crate::numerics::{erf, integrate_breaks, integrate_to_infinity, ABS_TOL};

/// Normalised target density on the real line.
pub trait Target: Send + Sync {
    fn name(&self) -> &str;
    fn log_density(&self, x: f64) -> f64;
    fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }
    /// `pi([lo, hi])`.
    fn mass(&self, lo: f64, hi: f64) -> f64;
    /// `sup_{[lo, hi]} pi`.
    fn sup_density(&self, lo: f64, hi: f64) -> f64;
    /// Exact draw from `pi( . | [lo, hi])`.
    fn sample_between(&self, lo: f64, hi: f64, rng: &mut dyn RngCore) -> f64;
    /// Point beyond which `log pi(x) - log pi(y) >= 2 (y - x)` for `y > x`
    /// (and the mirror statement on the negative half line).
    fn tail_threshold(&self) -> f64;
}

/// Centred Gaussian target with standard deviation `scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianTarget {
    pub scale: f64,
}

impl Target for GaussianTarget {
    fn name(&self) -> &str {
        "gaussian"
    }
    fn log_density(&self, x: f64) -> f64 {
        let z = x / self.scale;
        -0.5 * z * z - (self.scale * (2.0 * std::f64::consts::PI).sqrt()).ln()
    }
    fn mass(&self, lo: f64, hi: f64) -> f64 {
        let c = self.scale * std::f64::consts::SQRT_2;
        0.5 * (erf(hi / c) - erf(lo / c))
    }
    fn sup_density(&self, lo: f64, hi: f64) -> f64 {
        let x = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
        self.density(x)
    }
    fn sample_between(&self, lo: f64, hi: f64, rng: &mut dyn RngCore) -> f64 {
        if self.mass(lo, hi) > 0.3 {
            loop {
                let z: f64 = StandardNormal.sample(rng);
                let x = self.scale * z;
                if x >= lo && x <= hi {
                    return x;
                }
            }
        }
        let top = self.sup_density(lo, hi);
        loop {
            let x = lo + (hi - lo) * uniform(rng);
            if uniform(rng) * top <= self.density(x) {
                return x;
            }
        }
    }
    fn tail_threshold(&self) -> f64 {
        // (y^2 - x^2) / (2 s^2) >= 2 (y - x)  iff  x + y >= 4 s^2
        2.0 * self.scale * self.scale
    }
}

/// Symmetric random-walk increment with density `q`.
pub trait Increment: Send + Sync {
    fn name(&self) -> &str;
    fn density(&self, z: f64) -> f64;
    fn sample(&self, rng: &mut dyn RngCore) -> f64;
}

/// `q(z) = exp(-|z| / s) / (2 s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceIncrement {
    pub scale: f64,
}

impl Increment for LaplaceIncrement {
    fn name(&self) -> &str {
        "laplace"
    }
    fn density(&self, z: f64) -> f64 {
        (-z.abs() / self.scale).exp() / (2.0 * self.scale)
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u = uniform(rng) - 0.5;
        -self.scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianIncrement {
    pub scale: f64,
}

impl Increment for GaussianIncrement {
    fn name(&self) -> &str {
        "gaussian"
    }
    fn density(&self, z: f64) -> f64 {
        let u = z / self.scale;
        (-0.5 * u * u).exp() / (self.scale * (2.0 * std::f64::consts::PI).sqrt())
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.scale * z
    }
}

/// Random-walk Metropolis-Hastings on the real line.
#[derive(Clone)]
pub struct RealMh {
    pub target: Arc<dyn Target>,
    pub increment: Arc<dyn Increment>,
}

impl RealMh {
    pub fn new(target: Arc<dyn Target>, increment: Arc<dyn Increment>) -> Self {
        Self { target, increment }
    }

    fn accept_prob(&self, x: f64, y: f64) -> f64 {
        (self.target.log_density(y) - self.target.log_density(x)).min(0.0).exp()
    }

    fn moved_density(&self, x: f64, y: f64) -> f64 {
        self.increment.density(y - x) * self.accept_prob(x, y)
    }

    /// `int w(y) q(y - x) a(x, y) dy` over the whole line.
    fn integrate_moved(&self, x: f64, w: &dyn Fn(f64) -> f64) -> Result<f64, ChainError> {
        let f = |y: f64| {
            let d = self.moved_density(x, y);
            if d == 0.0 {
                0.0
            } else {
                d * w(y)
            }
        };
        let mut pts = vec![x, -x, 0.0];
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, hi) = (pts[0], pts[2]);
        let mid = integrate_breaks(f, &pts, ABS_TOL / 3.0)?;
        let right = integrate_to_infinity(f, hi, ABS_TOL / 3.0)?;
        let left = integrate_to_infinity(|u| f(-u), -lo, ABS_TOL / 3.0)?;
        Ok(left + mid + right)
    }

    /// Probability of staying put (rejected proposal) from `x`.
    pub fn rejection_mass(&self, x: f64) -> Result<f64, ChainError> {
        Ok((1.0 - self.integrate_moved(x, &|_| 1.0)?).max(0.0))
    }
}

impl ChainModel for RealMh {
    fn name(&self) -> &str {
        "logconcave"
    }
    fn state_space(&self) -> StateSpace {
        StateSpace::RealLine
    }
    fn contains(&self, x: State) -> bool {
        matches!(x, State::Real(v) if v.is_finite())
    }
    fn transition(&self, x: State, rng: &mut dyn RngCore) -> Transition {
        let xv = x.value();
        let y = xv + self.increment.sample(rng);
        let log_ratio = self.target.log_density(y) - self.target.log_density(xv);
        if log_ratio >= 0.0 || uniform(rng) < log_ratio.exp() {
            Transition { next: State::Real(y), moved: true }
        } else {
            Transition { next: State::Real(xv), moved: false }
        }
    }
    fn transition_density(&self, x: State, y: State) -> f64 {
        self.moved_density(x.value(), y.value())
    }
    fn expect(&self, x: State, h: &dyn Fn(State) -> f64) -> Result<f64, ChainError> {
        if !self.contains(x) {
            return Err(ChainError::OutsideStateSpace(x));
        }
        let xv = x.value();
        let moved = self.integrate_moved(xv, &|y| h(State::Real(y)))?;
        Ok(moved + h(x) * self.rejection_mass(xv)?)
    }
    fn prob_interval(&self, x: State, lo: f64, hi: f64) -> Result<f64, ChainError> {
        let xv = x.value();
        let f = |y: f64| self.moved_density(xv, y);
        let mut pts = vec![lo, hi];
        pts.extend([xv, -xv, 0.0].into_iter().filter(|p| *p > lo && *p < hi));
        let mut p = integrate_breaks(f, &pts, ABS_TOL)?;
        if xv >= lo && xv <= hi {
            p += self.rejection_mass(xv)?;
        }
        Ok(p)
    }
}
