//! Monte Carlo domination checks for each bound family: the empirical tail
//! must stay below the curve plus three standard errors.

use rand::Rng;
use rand_distr::Exp1;
use splitbound::bounds::{
    bernstein_psi1, general_markov, independent_onedep, independent_stopped, klein_rio, theorem_a,
    truncated_empirical, TailBoundCurve,
};
use splitbound::estimators::{domination_verdict, empirical_tail, replicate};
use splitbound::examples::{Example, GeometricExample, Observable};
use splitbound::constants::PiThetaChoice;
use splitbound::splitting::simulate_direct;
use splitbound::State;

const R: usize = 10_000;

fn log_grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| from * (to / from).powf(i as f64 / (points - 1) as f64)).collect()
}

fn assert_dominates(values: &[f64], grid: &[f64], curve: &TailBoundCurve) {
    let verdict = domination_verdict(&empirical_tail(values, grid).unwrap(), curve);
    assert!(verdict.checked > 0);
    assert!(verdict.pass, "{}: worst margin {} at t = {}", verdict.family, verdict.worst_margin, verdict.worst_t);
}

fn centred_exp(rng: &mut impl Rng) -> f64 {
    rng.sample::<f64, _>(Exp1) - 1.0
}

#[test]
fn bernstein_dominates_centred_exponential_sums() {
    let n = 10_000;
    // E exp(|X - 1| / 2) = 1.59 for X ~ Exp(1), so c = 2 is a valid psi_1 bound.
    let curve = bernstein_psi1(2.0, n as f64).unwrap();
    let sums = replicate(1, R, |_, rng| (0..n).map(|_| centred_exp(rng)).sum::<f64>().abs());
    assert_dominates(&sums, &log_grid(50.0, 2000.0, 20), &curve);
}

fn max_partial_abs(xs: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut best = 0.0f64;
    for x in xs {
        s += x;
        best = best.max(s.abs());
    }
    best
}

#[test]
fn onedep_dominates_iid_maximal_sums() {
    let n = 10_000u64;
    let curve = independent_onedep(2.0, 1.0, n, 1, 1.0).unwrap();
    let maxima = replicate(2, R, |_, rng| max_partial_abs((0..n).map(|_| centred_exp(rng))));
    assert_dominates(&maxima, &log_grid(50.0, 5000.0, 20), &curve);
}

#[test]
fn onedep_dominates_moving_sums() {
    let n = 10_000u64;
    // xi_i = eta_i + eta_{i+1} - 2 has variance 2 and psi_1 norm at most 4.
    let curve = independent_onedep(4.0, 2.0, n, 1, 1.0).unwrap();
    let maxima = replicate(3, R, |_, rng| {
        let eta: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        max_partial_abs(eta.windows(2).map(|w| w[0] + w[1] - 2.0))
    });
    assert_dominates(&maxima, &log_grid(100.0, 10_000.0, 20), &curve);
}

#[test]
fn stopped_sums_of_coins_are_dominated() {
    let (n, heads) = (10_000usize, 2_000usize);
    // N = first time the number of heads reaches `heads`, capped at n, so
    // (N - n)_+ = 0 and the excess norm vanishes.
    let c = 1.0 / 2f64.ln();
    let curve = independent_stopped(c, 1.0, n as f64, 1.0, 0.5, n as f64, 0.0, 2.0).unwrap();
    let sums = replicate(4, R, |_, rng| {
        let (mut s, mut h) = (0.0f64, 0usize);
        for _ in 0..n {
            if rng.random::<bool>() {
                s += 1.0;
                h += 1;
            } else {
                s -= 1.0;
            }
            if h == heads {
                break;
            }
        }
        s.abs()
    });
    assert_dominates(&sums, &log_grid(20.0, 2000.0, 20), &curve);
}

#[test]
fn klein_rio_dominates_a_finite_indicator_class() {
    let n = 10_000usize;
    // f_j(u) = 1{u <= j/9} - j/9 for j = 1..8: |f_j| <= 1, Var f_j <= 1/4.
    let sups = replicate(5, R, |_, rng| {
        let mut counts = [0usize; 9];
        for _ in 0..n {
            let u: f64 = rng.random();
            counts[((u * 9.0) as usize).min(8)] += 1;
        }
        let mut cum = 0usize;
        (1..=8)
            .map(|j| {
                cum += counts[j - 1];
                cum as f64 - n as f64 * j as f64 / 9.0
            })
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let es = sups.iter().sum::<f64>() / R as f64;
    let curve = klein_rio(0.25, n as f64, 1.0, es).unwrap();
    // Shift so that `> t` on the shifted values is `>= ES + t` up to ties.
    let shifted: Vec<f64> = sups.iter().map(|s| s - es + 1e-9).collect();
    assert_dominates(&shifted, &log_grid(5.0, 300.0, 20), &curve);
}

#[test]
fn truncated_empirical_dominates_plus_minus_class() {
    let (n, eps) = (10_000usize, 0.1);
    let curve = truncated_empirical(2.0, 1.0, n as f64, 1.0, eps).unwrap();
    let sups = replicate(6, R, |_, rng| (0..n).map(|_| centred_exp(rng)).sum::<f64>().abs());
    let es = sups.iter().sum::<f64>() / R as f64;
    let shifted: Vec<f64> = sups.iter().map(|s| s - (1.0 + eps) * es).collect();
    assert_dominates(&shifted, &log_grid(10.0, 1000.0, 20), &curve);
}

fn example1_deviations(n: usize, seed: u64) -> (GeometricExample, Vec<f64>) {
    let ex = GeometricExample::new(0.5, 1.2).unwrap();
    let obs = Observable { kappa: 1.0, s: 1.0 };
    let pi_g = ex.pi_g(&obs).unwrap();
    let model = ex.model();
    let devs = replicate(seed, R, |_, rng| {
        let path = simulate_direct(model.as_ref(), n, State::Int(0), rng);
        (path.iter().map(|x| obs.eval(*x)).sum::<f64>() - n as f64 * pi_g).abs()
    });
    (ex, devs)
}

#[test]
fn example_one_markov_bounds_dominate() {
    let n = 1 << 12;
    let (ex, devs) = example1_deviations(n, 7);
    let cert = ex.certify(&Observable { kappa: 1.0, s: 1.0 }, State::Int(0), PiThetaChoice::Exact).unwrap();
    let grid = log_grid(64.0, 8192.0, 20);
    assert_dominates(&devs, &grid, &theorem_a(&cert, n as f64, 0.5).unwrap());
    let gm = general_markov(cert.a, cert.b, cert.c, cert.sigma_cap / cert.pi_theta, cert.pi_theta, n as u64, 1, cert.alpha)
        .unwrap();
    assert_eq!(gm.deviation_scale, 3.0);
    assert_dominates(&devs, &grid, &gm);
}
