use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::RngCore;

use super::SplitError;
use crate::chain::{m_step_distribution, uniform, ChainModel, Minorizer, SmallSet, State, StateSpace};

/// Residual acceptance ratios above `1 + RESIDUAL_SLACK` mean the
/// minorization does not hold at the current state.
const RESIDUAL_SLACK: f64 = 1e-12;
const MAX_RESIDUAL_TRIES: usize = 10_000_000;

/// A simulated split chain.
///
/// `levels[k]` is `Y_k`. The trajectory stores `X_0 .. X_{Km}` with `K` the
/// number of levels; the final state is the next skeleton state, kept so
/// that the chain can be extended without changing its law.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitTrajectory {
    pub m: usize,
    pub levels: Vec<bool>,
    states: Vec<State>,
}

impl SplitTrajectory {
    /// Number of usable states, `K m`.
    pub fn len(&self) -> usize {
        self.levels.len() * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `X_0 .. X_{Km - 1}`.
    pub fn states(&self) -> &[State] {
        &self.states[..self.len()]
    }

    /// Skeleton indices with `Y_k = 1`.
    pub fn regenerations(&self) -> Vec<usize> {
        self.levels.iter().enumerate().filter(|(_, y)| **y).map(|(k, _)| k).collect()
    }
}

/// Simulator for one split chain. Holds per-model caches, so create one per
/// thread.
pub struct SplitSampler<'a> {
    model: &'a dyn ChainModel,
    set: &'a SmallSet,
    nu_pmf: Option<BTreeMap<i64, f64>>,
    nu_norm: f64,
    pm_cache: HashMap<i64, BTreeMap<i64, f64>>,
}

impl<'a> SplitSampler<'a> {
    pub fn new(model: &'a dyn ChainModel, set: &'a SmallSet) -> Result<Self, SplitError> {
        set.validate()?;
        if set.m > 1 && model.state_space() == StateSpace::RealLine {
            return Err(crate::chain::ChainError::Unsupported("split simulation with m > 1 on the real line".into()).into());
        }
        let nu_pmf = match &set.nu {
            Minorizer::KernelAt(State::Int(x0)) => Some(m_step_distribution(model, *x0, set.m)?),
            Minorizer::Pmf(p) => {
                let mut map = BTreeMap::new();
                for (s, w) in p {
                    *map.entry(*s).or_insert(0.0) += *w;
                }
                Some(map)
            }
            _ => None,
        };
        let nu_norm = match &set.nu {
            Minorizer::TargetRestricted { target, lo, hi } => target.mass(*lo, *hi),
            _ => 1.0,
        };
        Ok(Self { model, set, nu_pmf, nu_norm, pm_cache: HashMap::new() })
    }

    fn nu_mass(&self, y: State) -> f64 {
        match (&self.nu_pmf, &self.set.nu, y) {
            (Some(p), _, State::Int(i)) => p.get(&i).copied().unwrap_or(0.0),
            (None, Minorizer::TargetRestricted { target, lo, hi }, s) => {
                let v = s.value();
                if v < *lo || v > *hi {
                    0.0
                } else {
                    target.density(v) / self.nu_norm
                }
            }
            _ => 0.0,
        }
    }

    fn pm(&mut self, x: i64) -> Result<&BTreeMap<i64, f64>, SplitError> {
        if !self.pm_cache.contains_key(&x) {
            let d = m_step_distribution(self.model, x, self.set.m)?;
            self.pm_cache.insert(x, d);
        }
        Ok(&self.pm_cache[&x])
    }

    /// One skeleton step from `x = X_{km}`: returns `Y_k` and pushes
    /// `X_{km+1} .. X_{(k+1)m}` onto `out`.
    fn skeleton_step(&mut self, x: State, rng: &mut dyn RngCore, out: &mut Vec<State>) -> Result<bool, SplitError> {
        let m = self.set.m;
        if !self.set.contains(x) {
            let mut cur = x;
            for _ in 0..m {
                cur = self.model.step(cur, rng);
                out.push(cur);
            }
            return Ok(false);
        }
        let delta = self.set.delta;
        // With delta = 1 no coin is drawn, which keeps the split chain on the
        // same random stream as the plain chain.
        let regen = delta >= 1.0 || uniform(rng) < delta;
        if regen {
            let y = self.set.nu.sample(self.model, m, rng);
            if m == 1 {
                out.push(y);
            } else {
                self.bridge(x, y, rng, out)?;
            }
            return Ok(true);
        }
        for _ in 0..MAX_RESIDUAL_TRIES {
            let mark = out.len();
            let ratio = if m == 1 {
                let tr = self.model.transition(x, rng);
                out.push(tr.next);
                match self.model.state_space() {
                    StateSpace::IntegerLattice => delta * self.nu_mass(tr.next) / self.model.transition_density(x, tr.next),
                    // A rejected proposal lands on the kernel's atom at x,
                    // which nu (a density) does not charge.
                    StateSpace::RealLine if !tr.moved => 0.0,
                    StateSpace::RealLine => delta * self.nu_mass(tr.next) / self.model.transition_density(x, tr.next),
                }
            } else {
                let mut cur = x;
                for _ in 0..m {
                    cur = self.model.step(cur, rng);
                    out.push(cur);
                }
                let nu = self.nu_mass(cur);
                let xi = x.as_int().expect("lattice state");
                let p = self.pm(xi)?.get(&cur.as_int().unwrap()).copied().unwrap_or(0.0);
                delta * nu / p
            };
            if ratio > 1.0 + RESIDUAL_SLACK || ratio.is_nan() {
                return Err(SplitError::ResidualKernelNegative { state: x, ratio });
            }
            if ratio <= 0.0 || uniform(rng) >= ratio {
                return Ok(false);
            }
            out.truncate(mark);
        }
        Err(SplitError::ResidualKernelNegative { state: x, ratio: 1.0 })
    }

    /// Path `X_{km+1} .. X_{km+m}` from `x` conditioned to end at `y`,
    /// sampled exactly by enumerating the finite rows.
    fn bridge(&mut self, x: State, y: State, rng: &mut dyn RngCore, out: &mut Vec<State>) -> Result<(), SplitError> {
        let m = self.set.m;
        let (xi, yi) = (x.as_int().expect("lattice"), y.as_int().expect("lattice"));
        let row = |s: i64| self.model.row(s).unwrap_or_default();
        let mut layers: Vec<BTreeSet<i64>> = vec![BTreeSet::from([xi])];
        for _ in 0..m {
            let next: BTreeSet<i64> = layers.last().unwrap().iter().flat_map(|s| row(*s).into_iter().map(|(t, _)| t)).collect();
            layers.push(next);
        }
        // h[k](z) = P^k(z, y) for z in layers[m - k]
        let mut h: Vec<BTreeMap<i64, f64>> = vec![BTreeMap::new(); m + 1];
        h[0] = layers[m].iter().map(|z| (*z, if *z == yi { 1.0 } else { 0.0 })).collect();
        for k in 1..=m {
            let mut hk = BTreeMap::new();
            for &z in &layers[m - k] {
                let v: f64 = row(z).iter().map(|(w, p)| p * h[k - 1].get(w).copied().unwrap_or(0.0)).sum();
                hk.insert(z, v);
            }
            h[k] = hk;
        }
        if h[m].get(&xi).copied().unwrap_or(0.0) <= 0.0 {
            return Err(SplitError::ResidualKernelNegative { state: x, ratio: f64::INFINITY });
        }
        let mut cur = xi;
        for i in 1..m {
            let weights: Vec<(i64, f64)> =
                row(cur).into_iter().map(|(w, p)| (w, p * h[m - i].get(&w).copied().unwrap_or(0.0))).collect();
            let total: f64 = weights.iter().map(|(_, w)| w).sum();
            let u = uniform(rng) * total;
            let mut acc = 0.0;
            let mut pick = weights.iter().rev().find(|(_, w)| *w > 0.0).map(|(s, _)| *s).unwrap();
            for (s, w) in &weights {
                acc += w;
                if u < acc {
                    pick = *s;
                    break;
                }
            }
            cur = pick;
            out.push(State::Int(cur));
        }
        out.push(y);
        Ok(())
    }

    /// Appends `skeleton_steps` skeleton steps to `traj`.
    pub fn extend(&mut self, traj: &mut SplitTrajectory, skeleton_steps: usize, rng: &mut dyn RngCore) -> Result<(), SplitError> {
        traj.states.reserve(skeleton_steps * self.set.m);
        traj.levels.reserve(skeleton_steps);
        for _ in 0..skeleton_steps {
            let x = *traj.states.last().expect("trajectory always holds its current state");
            let y = self.skeleton_step(x, rng, &mut traj.states)?;
            traj.levels.push(y);
        }
        Ok(())
    }

    /// Split trajectory with `n` usable states started at `start`.
    pub fn simulate(&mut self, n: usize, start: State, rng: &mut dyn RngCore) -> Result<SplitTrajectory, SplitError> {
        let m = self.set.m;
        if !n.is_multiple_of(m) {
            return Err(SplitError::NotMultiple { n, m });
        }
        if !self.model.contains(start) {
            return Err(crate::chain::ChainError::OutsideStateSpace(start).into());
        }
        let mut traj = SplitTrajectory { m, levels: Vec::new(), states: vec![start] };
        self.extend(&mut traj, n / m, rng)?;
        Ok(traj)
    }
}

/// Convenience wrapper around [`SplitSampler::simulate`].
pub fn simulate_split(
    model: &dyn ChainModel,
    set: &SmallSet,
    n: usize,
    start: State,
    rng: &mut dyn RngCore,
) -> Result<SplitTrajectory, SplitError> {
    SplitSampler::new(model, set)?.simulate(n, start, rng)
}

/// `X_0 .. X_{n-1}` of the unsplit chain.
pub fn simulate_direct(model: &dyn ChainModel, n: usize, start: State, rng: &mut dyn RngCore) -> Vec<State> {
    let mut out = Vec::with_capacity(n);
    let mut x = start;
    for _ in 0..n {
        out.push(x);
        x = model.step(x, rng);
    }
    out
}
