//! Checks of the regeneration-side constants against split-chain simulation:
//! the count of regenerations, the initial block, block-sum Orlicz norms and
//! the Hilbert-space expectation bound.

use serde_json::json;
use splitbound::bounds::{hilbert_expectation, uw_expectation_bounds, NDeviation};
use splitbound::constants::PiThetaChoice;
use splitbound::estimators::{estimate_psi_alpha, replicate};
use splitbound::examples::{Example, ExampleRegistry, GeometricExample, Observable};
use splitbound::splitting::{simulate_direct, simulate_ledger, RegenerationLedger};
use splitbound::State;

const OBS: Observable = Observable { kappa: 1.0, s: 1.0 };

fn ledgers(ex: &dyn Example, n: usize, replicas: usize, start: State, seed: u64) -> Vec<RegenerationLedger> {
    let (model, set) = (ex.model(), ex.small_set());
    let pi_g = ex.pi_g(&OBS).unwrap();
    let f = move |x: State| OBS.eval(x) - pi_g;
    replicate(seed, replicas, |_, rng| simulate_ledger(model.as_ref(), &set, &f, n, start, rng).unwrap())
}

#[test]
fn regeneration_count_tail_is_dominated() {
    let ex = GeometricExample::new(0.5, 1.2).unwrap();
    let n = 4096;
    let cert = ex.certify(&OBS, State::Int(0), PiThetaChoice::Exact).unwrap();
    let nd = NDeviation::new(n as f64, cert.pi_theta, cert.d, 0.05).unwrap();
    let counts: Vec<u64> = ledgers(&ex, n, 10_000, State::Int(0), 21).iter().map(|l| l.sigma.len() as u64).collect();
    let r = counts.len() as f64;
    for k in (nd.first_k()..nd.first_k() + 400).step_by(20) {
        let p = counts.iter().filter(|&&c| c > k).count() as f64 / r;
        let se = (p * (1.0 - p) / r).sqrt();
        assert!(p <= nd.tail(k) + 3.0 * se, "k = {k}: {p} > {}", nd.tail(k));
    }
}

#[test]
fn initial_block_mean_is_below_its_bound() {
    let ex = GeometricExample::new(0.5, 1.2).unwrap();
    let cert = ex.certify(&OBS, State::Int(0), PiThetaChoice::Exact).unwrap();
    let (eu, _) = uw_expectation_bounds(cert.a, cert.b, cert.pi_theta, cert.alpha);
    let us: Vec<f64> = ledgers(&ex, 2048, 4000, State::Int(0), 22).iter().map(|l| l.u()).collect();
    let mean = us.iter().sum::<f64>() / us.len() as f64;
    let sd = (us.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / us.len() as f64).sqrt();
    assert!(mean <= eu + 3.0 * sd / (us.len() as f64).sqrt(), "{mean} vs {eu}");
}

fn check_orlicz(ex: &dyn Example, start: State, n: usize, replicas: usize) {
    let cert = ex.certify(&OBS, start, PiThetaChoice::Exact).unwrap();
    let ls = ledgers(ex, n, replicas, start, 23);
    let blocks: Vec<f64> = ls.iter().flat_map(|l| l.blocks.iter().copied()).collect();
    let heads: Vec<f64> = ls.iter().map(|l| l.head).collect();
    let tails: Vec<f64> = ls.iter().map(|l| l.tail).collect();
    let (ec, ea, eb) = (
        estimate_psi_alpha(&blocks, cert.alpha).unwrap(),
        estimate_psi_alpha(&heads, cert.alpha).unwrap(),
        estimate_psi_alpha(&tails, cert.alpha).unwrap(),
    );
    assert!(ec <= cert.c, "{}: block sums {ec} > c = {}", ex.name(), cert.c);
    assert!(ea <= cert.a, "{}: initial block {ea} > a = {}", ex.name(), cert.a);
    assert!(eb <= cert.b, "{}: final block {eb} > b = {}", ex.name(), cert.b);
}

#[test]
fn simulated_block_norms_stay_below_certified_constants() {
    check_orlicz(&GeometricExample::new(0.5, 1.2).unwrap(), State::Int(0), 4096, 500);
    let ex2 = ExampleRegistry::with_defaults().build("logconcave", &json!({"x_star": 2.5})).unwrap();
    check_orlicz(ex2.as_ref(), State::Real(0.0), 20_000, 200);
}

#[test]
fn hilbert_expectation_bounds_the_mean_norm() {
    let ex = GeometricExample::new(0.5, 1.2).unwrap();
    let rho = ex.rho;
    // G(i) = u(i) - pi(u) with u(i) = (cos i, sin i, 1{i = 0}) / norm: ||G|| <= 2.
    let u = |i: i64| {
        let v = [(i as f64).cos(), (i as f64).sin(), if i == 0 { 1.0 } else { 0.0 }];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.map(|x| x / norm)
    };
    let mut pu = [0.0; 3];
    for i in 0..400 {
        let w = (1.0 - rho) * rho.powi(i as i32);
        for (p, x) in pu.iter_mut().zip(u(i)) {
            *p += w * x;
        }
    }
    // ||G(i)|| <= 2 <= 2 (1 + i), the observable the constants are certified for.
    let bound_obs = Observable { kappa: 2.0, s: 1.0 };
    let cert = ex.certify(&bound_obs, State::Int(0), PiThetaChoice::Exact).unwrap();
    let n = 1 << 12;
    let eb = hilbert_expectation(cert.a, cert.b, cert.c, cert.pi_theta, cert.alpha, n as f64);
    let model = ex.model();
    let norms = replicate(24, 2000, |_, rng| {
        let mut s = [0.0; 3];
        for x in simulate_direct(model.as_ref(), n, State::Int(0), rng) {
            for ((acc, ux), p) in s.iter_mut().zip(u(x.as_int().unwrap())).zip(pu) {
                *acc += ux - p;
            }
        }
        s.iter().map(|x| x * x).sum::<f64>().sqrt()
    });
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let sd = (norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / norms.len() as f64).sqrt();
    assert!(mean <= eb + 3.0 * sd / (norms.len() as f64).sqrt(), "{mean} vs {eb}");
    assert!(eb > 4.0 * (n as f64).sqrt());
}
