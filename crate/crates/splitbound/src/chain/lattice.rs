use std::collections::BTreeMap;

use rand::RngCore;

use super::{uniform, ChainError, ChainModel, State, StateSpace, Transition};

/// Inverse-CDF draw from a finite row. One uniform per call.
pub(crate) fn sample_row(row: &[(i64, f64)], rng: &mut dyn RngCore) -> i64 {
    let u = uniform(rng);
    let mut acc = 0.0;
    for &(s, p) in row {
        acc += p;
        if u < acc {
            return s;
        }
    }
    // Rounding left a sliver above the last cumulative weight.
    row.iter().rev().find(|(_, p)| *p > 0.0).map(|(s, _)| *s).unwrap_or(row[0].0)
}

fn row_of(model: &dyn ChainModel, x: i64) -> Result<Vec<(i64, f64)>, ChainError> {
    model
        .row(x)
        .ok_or_else(|| ChainError::Unsupported(format!("model `{}` has no finite transition rows", model.name())))
}

/// `P^m(x, .)` as a sparse map, computed by exact row propagation.
pub fn m_step_distribution(model: &dyn ChainModel, x: i64, m: usize) -> Result<BTreeMap<i64, f64>, ChainError> {
    let mut dist = BTreeMap::from([(x, 1.0)]);
    for _ in 0..m {
        let mut next = BTreeMap::new();
        for (&s, &w) in &dist {
            for (t, p) in row_of(model, s)? {
                *next.entry(t).or_insert(0.0) += w * p;
            }
        }
        dist = next;
    }
    Ok(dist)
}

fn lattice_expect(model: &dyn ChainModel, x: State, h: &dyn Fn(State) -> f64) -> Result<f64, ChainError> {
    let i = x.as_int().filter(|_| model.contains(x)).ok_or(ChainError::OutsideStateSpace(x))?;
    // Summing small terms first keeps cancellation in drift checks tight.
    let mut terms: Vec<f64> = row_of(model, i)?.into_iter().map(|(s, p)| p * h(State::Int(s))).collect();
    terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(terms.iter().sum())
}

fn lattice_prob(model: &dyn ChainModel, x: State, lo: f64, hi: f64) -> Result<f64, ChainError> {
    let i = x.as_int().ok_or(ChainError::OutsideStateSpace(x))?;
    Ok(row_of(model, i)?
        .into_iter()
        .filter(|(s, _)| (*s as f64) >= lo && (*s as f64) <= hi)
        .map(|(_, p)| p)
        .sum())
}

fn lattice_density(model: &dyn ChainModel, x: State, y: State) -> f64 {
    match (x, y) {
        (State::Int(a), State::Int(b)) => model
            .row(a)
            .map(|r| r.iter().filter(|(s, _)| *s == b).map(|(_, p)| *p).sum())
            .unwrap_or(0.0),
        _ => 0.0,
    }
}

fn lattice_transition(model: &dyn ChainModel, x: State, rng: &mut dyn RngCore) -> Transition {
    let i = x.as_int().expect("lattice model fed a real state");
    let row = model.row(i).expect("lattice model without a row");
    let next = sample_row(&row, rng);
    Transition { next: State::Int(next), moved: next != i }
}

/// Random-walk Metropolis-Hastings chain on `{0, 1, 2, ...}` targeting the
/// geometric law `pi(i) = (1 - rho) rho^i`.
///
/// Proposals move one step up or down with probability 1/2 each; from 0 the
/// downward proposal is replaced by staying at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricMh {
    pub rho: f64,
}

impl GeometricMh {
    pub fn new(rho: f64) -> Result<Self, ChainError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(ChainError::InvalidModel(format!("rho = {rho} must lie in (0, 1)")));
        }
        Ok(Self { rho })
    }

    /// Stationary mass of state `i`.
    pub fn pi(&self, i: i64) -> f64 {
        (1.0 - self.rho) * self.rho.powi(i as i32)
    }
}

impl ChainModel for GeometricMh {
    fn name(&self) -> &str {
        "geometric"
    }
    fn state_space(&self) -> StateSpace {
        StateSpace::IntegerLattice
    }
    fn contains(&self, x: State) -> bool {
        matches!(x, State::Int(i) if i >= 0)
    }
    fn transition(&self, x: State, rng: &mut dyn RngCore) -> Transition {
        lattice_transition(self, x, rng)
    }
    fn row(&self, x: i64) -> Option<Vec<(i64, f64)>> {
        let r = self.rho;
        if x < 0 {
            None
        } else if x == 0 {
            Some(vec![(0, 1.0 - r / 2.0), (1, r / 2.0)])
        } else {
            Some(vec![(x - 1, 0.5), (x, (1.0 - r) / 2.0), (x + 1, r / 2.0)])
        }
    }
    fn transition_density(&self, x: State, y: State) -> f64 {
        lattice_density(self, x, y)
    }
    fn expect(&self, x: State, h: &dyn Fn(State) -> f64) -> Result<f64, ChainError> {
        lattice_expect(self, x, h)
    }
    fn prob_interval(&self, x: State, lo: f64, hi: f64) -> Result<f64, ChainError> {
        lattice_prob(self, x, lo, hi)
    }
}

/// Finite chain on `{0, ..., K-1}` given by a row-stochastic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixChain {
    rows: Vec<Vec<(i64, f64)>>,
    dense: Vec<Vec<f64>>,
}

impl MatrixChain {
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self, ChainError> {
        let k = p.len();
        if k == 0 {
            return Err(ChainError::InvalidModel("empty transition matrix".into()));
        }
        for (i, row) in p.iter().enumerate() {
            if row.len() != k {
                return Err(ChainError::InvalidModel(format!("row {i} has {} entries, expected {k}", row.len())));
            }
            if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(ChainError::InvalidModel(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(ChainError::InvalidModel(format!("row {i} sums to {s}, not 1")));
            }
        }
        let rows = p
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(j, v)| (j as i64, *v)).collect())
            .collect();
        Ok(Self { rows, dense: p })
    }

    pub fn size(&self) -> usize {
        self.dense.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.dense
    }

    /// Stationary distribution, from `pi (P - I) = 0` with one equation
    /// replaced by the normalisation. Assumes a single recurrent class.
    pub fn stationary(&self) -> Result<Vec<f64>, ChainError> {
        let k = self.size();
        // Rows of `a` are equations; unknowns are pi_0..pi_{k-1}.
        let mut a = vec![vec![0.0; k + 1]; k];
        for (j, eq) in a.iter_mut().enumerate().take(k - 1) {
            for (i, coef) in eq.iter_mut().enumerate().take(k) {
                *coef = self.dense[i][j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        for c in a[k - 1].iter_mut() {
            *c = 1.0;
        }
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
                .unwrap();
            if a[piv][col].abs() < 1e-14 {
                return Err(ChainError::InvalidModel("transition matrix has no unique stationary law".into()));
            }
            a.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    if f != 0.0 {
                        for c in col..=k {
                            a[r][c] -= f * a[col][c];
                        }
                    }
                }
            }
        }
        Ok((0..k).map(|i| (a[i][k] / a[i][i]).max(0.0)).collect())
    }
}

impl ChainModel for MatrixChain {
    fn name(&self) -> &str {
        "matrix"
    }
    fn state_space(&self) -> StateSpace {
        StateSpace::IntegerLattice
    }
    fn contains(&self, x: State) -> bool {
        matches!(x, State::Int(i) if i >= 0 && (i as usize) < self.size())
    }
    fn transition(&self, x: State, rng: &mut dyn RngCore) -> Transition {
        lattice_transition(self, x, rng)
    }
    fn row(&self, x: i64) -> Option<Vec<(i64, f64)>> {
        if x < 0 {
            return None;
        }
        self.rows.get(x as usize).cloned()
    }
    fn transition_density(&self, x: State, y: State) -> f64 {
        lattice_density(self, x, y)
    }
    fn expect(&self, x: State, h: &dyn Fn(State) -> f64) -> Result<f64, ChainError> {
        lattice_expect(self, x, h)
    }
    fn prob_interval(&self, x: State, lo: f64, hi: f64) -> Result<f64, ChainError> {
        lattice_prob(self, x, lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::replica_rng;

    #[test]
    fn geometric_rows_are_stochastic_and_reversible() {
        let g = GeometricMh::new(0.4).unwrap();
        for i in 0..50 {
            let row = g.row(i).unwrap();
            let s: f64 = row.iter().map(|(_, p)| p).sum();
            assert!((s - 1.0).abs() < 1e-15);
            // detailed balance with the neighbour above
            let up = g.transition_density(State::Int(i), State::Int(i + 1));
            let down = g.transition_density(State::Int(i + 1), State::Int(i));
            assert!((g.pi(i) * up - g.pi(i + 1) * down).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_pv_at_zero_matches_closed_form() {
        let (rho, a) = (0.5, 1.2_f64);
        let g = GeometricMh::new(rho).unwrap();
        let pv = g.expect(State::Int(0), &|s| a.powf(s.value() + 1.0)).unwrap();
        let closed = (1.0 - rho / 2.0) * a + rho * a * a / 2.0;
        assert!((pv - closed).abs() < 1e-14);
    }

    #[test]
    fn matrix_stationary_solves_balance() {
        let p = vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.5], vec![0.1, 0.0, 0.9]];
        let mc = MatrixChain::new(p.clone()).unwrap();
        let pi = mc.stationary().unwrap();
        for j in 0..3 {
            let lhs: f64 = (0..3).map(|i| pi[i] * p[i][j]).sum();
            assert!((lhs - pi[j]).abs() < 1e-14);
        }
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matrix_rejects_bad_rows() {
        assert!(MatrixChain::new(vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(MatrixChain::new(vec![vec![1.0]]).is_ok());
    }

    #[test]
    fn m_step_distribution_is_a_probability() {
        let g = GeometricMh::new(0.3).unwrap();
        let d = m_step_distribution(&g, 2, 5).unwrap();
        assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(d.keys().all(|k| *k >= 0 && *k <= 7));
    }

    #[test]
    fn row_sampling_hits_empirical_frequencies() {
        let g = GeometricMh::new(0.5).unwrap();
        let mut rng = replica_rng(11, 0);
        let n = 200_000;
        let ups = (0..n).filter(|_| g.step(State::Int(3), &mut rng) == State::Int(4)).count();
        let p = ups as f64 / n as f64;
        assert!((p - 0.25).abs() < 4.0 * (0.25 * 0.75 / n as f64).sqrt());
    }
}
