use super::*;
use proptest::prelude::*;

/// Plain 200-step bisection on the splitting equation, written out
/// independently of `solve_r`.
fn r_oracle(delta: f64) -> f64 {
    let f = |r: f64| {
        2f64.powf(1.0 / r) * delta.powf(1.0 - 1.0 / r) + 2f64.powf(1.0 + 1.0 / r) * (1.0 - delta).powf(1.0 - 1.0 / r) - 2.0
    };
    let (mut lo, mut hi) = (1.0, 1e12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn r_is_one_at_unit_delta() {
    assert_eq!(solve_r(1.0).unwrap(), 1.0);
}

#[test]
fn r_matches_independent_bisection() {
    for delta in [0.5, 0.1, 0.9, 0.003] {
        let r = solve_r(delta).unwrap();
        assert!((r - r_oracle(delta)).abs() <= 1e-10 * r, "delta={delta}");
    }
}

#[test]
fn r_residual_and_upper_bound_on_log_grid() {
    for i in 0..100 {
        let delta = 10f64.powf(-8.0 + 8.0 * i as f64 / 99.0);
        let r = solve_r(delta).unwrap();
        assert!(r_equation(delta, r).abs() <= 1e-12, "delta={delta} residual={}", r_equation(delta, r));
        assert!(r <= r_upper_bound(delta) * (1.0 + 1e-12), "delta={delta}");
        assert!(r >= 1.0);
    }
}

#[test]
fn r_rejects_out_of_range_delta() {
    assert!(matches!(solve_r(0.0), Err(ConstantsError::InvalidDelta(_))));
    assert!(matches!(solve_r(1.5), Err(ConstantsError::InvalidDelta(_))));
}

#[test]
fn combine_reduces_to_sums_at_alpha_one() {
    let n = ExcursionNorms { cal_a: 3.0, cal_b: 1.0, cal_c: 2.0, cal_d: 5.0 };
    let (a, b, c) = combine_orlicz(1.0, &n, 1.5).unwrap();
    assert!((a - 1.5 * 8.0).abs() < 1e-14);
    assert!((b - 1.5 * 7.0).abs() < 1e-14);
    assert!((c - 1.5 * 7.0).abs() < 1e-14);
    assert_eq!(combine_orlicz(0.5, &ExcursionNorms { cal_a: 0.0, cal_b: 0.0, cal_c: 0.0, cal_d: 0.0 }, 1.0).unwrap(), (0.0, 0.0, 0.0));
}

#[test]
fn sigma_upper_closed_forms() {
    assert!((sigma_upper(1.0, 1.0) - 2.0).abs() < 1e-14);
    assert!((sigma_upper(1.0, 0.5) - 4.0 * 3f64.sqrt()).abs() < 1e-12);
}

fn example_one_drift(rho: f64, a: f64) -> GeometricDrift {
    GeometricDrift { lambda: 1.0 - 1.0 / (2.0 * a) - rho * a / 2.0 - (1.0 - rho) / 2.0, b: (a - 1.0) / 2.0, k: a }
}

/// Straight-line transcription of the drift-norm formulas for `x` in `C`.
fn drift_oracle(lam: f64, b: f64, k: f64, pi_c: f64, kappa: f64, s: f64, v_x: f64) -> (f64, f64, f64) {
    let al = 1.0 / (s + 1.0);
    let ln2 = 2f64.ln();
    let big_l = (1.0 / (1.0 - lam)).ln();
    let piv = b * pi_c / lam;
    let pig = if s <= 1.0 { (piv.ln()).powf(s) } else { (piv.ln() + s - 1.0).powf(s) - (s - 1.0).powf(s) };
    let br = |z: f64| ((z.ln() / ln2).max(1.0).powf(1.0 - al) + ln2.powf(al - 1.0) * pig.powf(al)).powf(1.0 / al);
    let first = |z: f64| (z.ln() / ln2).max(1.0);
    let ca = kappa / big_l * first(b / (1.0 - lam) + k) * br(v_x / lam + b / lam);
    let cb = kappa / big_l * first(piv + (b / (1.0 - lam) + k) * pi_c) * br(piv / lam + b / lam);
    let cc = kappa / big_l * first(b / (1.0 - lam) + k) * br(b / lam + k / lam);
    (ca, cb, cc)
}

#[test]
fn example_one_lambda_is_one_thirtieth() {
    let d = example_one_drift(0.5, 1.2);
    assert!((d.lambda - 1.0 / 30.0).abs() < 1e-15);
}

#[test]
fn example_one_norms_match_oracle_and_frozen_values() {
    let drift = example_one_drift(0.5, 1.2);
    let kappa = 1.0 / 1.2f64.ln();
    let start = StartPoint { v_x: 1.2, in_c: true };
    let dn = geometric_drift_norms(&drift, kappa, 1.0, start, 0.5).unwrap();
    let (ca, cb, cc) = drift_oracle(drift.lambda, drift.b, drift.k, 0.5, kappa, 1.0, 1.2);
    for (x, y) in [(dn.norms.cal_a, ca), (dn.norms.cal_b, cb), (dn.norms.cal_c, cc)] {
        assert!((x - y).abs() <= 1e-12 * y, "{x} vs {y}");
    }
    // Frozen from an independent floating-point transcription.
    let set = certify_geometric(&GeometricInputs {
        drift,
        delta: 1.0,
        pi_c: 0.5,
        start,
        kappa,
        s: 1.0,
        pi_theta: PiThetaChoice::Drift,
    })
    .unwrap();
    assert!((set.a - 6074.791103388487).abs() < 1e-9 * set.a);
    assert!((set.b - 6529.328864971573).abs() < 1e-9 * set.b);
    assert!((set.c - 6074.791103388487).abs() < 1e-9 * set.c);
    assert!((set.d - 58.99434984961682).abs() < 1e-9 * set.d);
    assert!((set.pi_theta - 1.0 / set.d).abs() < 1e-15);
    // c is (2r)^{1/alpha} calC with r = 1, alpha = 1/2
    assert!((set.c - 4.0 * set.norms.cal_c).abs() < 1e-9 * set.c);
    // pi V bound is attained by the geometric target
    assert!((dn.pi_v - 1.5).abs() < 1e-12);
}

#[test]
fn zero_kappa_gives_zero_norms() {
    let drift = example_one_drift(0.5, 1.2);
    let dn = geometric_drift_norms(&drift, 0.0, 1.0, StartPoint { v_x: 1.2, in_c: true }, 0.5).unwrap();
    assert_eq!(dn.pi_abs_g, 0.0);
    assert_eq!((dn.norms.cal_a, dn.norms.cal_b, dn.norms.cal_c), (0.0, 0.0, 0.0));
}

#[test]
fn heavy_tail_branch_of_pi_g() {
    let drift = GeometricDrift { lambda: 0.2, b: 3.0, k: 4.0 };
    let l = (3.0f64 * 0.4 / 0.2).ln();
    let got = pi_abs_g_over_kappa(&drift, 2.5, 0.4);
    assert!((got - ((l + 1.5).powf(2.5) - 1.5f64.powf(2.5))).abs() < 1e-12);
    assert!((pi_abs_g_over_kappa(&drift, 0.5, 0.4) - l.sqrt()).abs() < 1e-14);
}

#[test]
fn tau_and_d_e_relations() {
    let drift = GeometricDrift { lambda: 0.1, b: 5.0, k: 10.0 };
    let t = tau_psi1_norms(&drift, StartPoint { v_x: 1e6, in_c: false }, 50.0, 0.3).unwrap();
    let l = (1.0f64 / 0.9).ln();
    assert!((t.from_x - (1e6f64.ln() / 2f64.ln()) / l).abs() < 1e-12);
    assert!((bound_d(&drift, 1.3) - 2.0 * 1.3 * t.sup_c).abs() < 1e-12);
    let e = bound_e(&drift, 1.3, StartPoint { v_x: 1e6, in_c: false });
    assert!((e - 1.3 * (1e6f64.ln() / 2f64.ln() + 1.0) / l).abs() < 1e-12);
}

#[test]
fn regular_drift_uses_log_of_b_plus_k() {
    let n = regular_drift_norms(0.5, 1.0, 30.0, 34.0, 2.0, 100.0, 7.0, 3.0, 4.0, 5.0).unwrap();
    let gam: f64 = 0.5 / 0.5;
    assert!((n.cal_c - 3.0 * 2.0 * (64f64.ln() / 2f64.ln()).powf(1.0 / gam)).abs() < 1e-12);
    assert!((n.cal_a - 4.0 * 2.0 * (130f64.ln() / 2f64.ln()).powf(1.0 / gam)).abs() < 1e-12);
    assert!((n.cal_b - 5.0 * 2.0 * (37f64.ln() / 2f64.ln()).powf(1.0 / gam)).abs() < 1e-12);
    assert_eq!(n.cal_c, n.cal_d);
}

#[test]
fn multiplicative_drift_corollary() {
    let md = MultiplicativeDrift { b: 1.0, k: 2.0, c: 0.5 };
    assert!((md.psi1_bound() - 3.0 / 2f64.ln() * 0.5).abs() < 1e-14);
    let n = md.norms(1.0, 4.0, 0.7);
    assert!((n.cal_a - (8.0 / (2.0 * 2f64.ln())) * 0.5).abs() < 1e-14);
    assert!((n.cal_b - ((2.0 + 1.4 + 2.0) / (2.0 * 2f64.ln())) * 0.5).abs() < 1e-14);
    assert!((md.excursion_moment_bound(4.0, true) - 5f64.exp()).abs() < 1e-12);
    // tiny constants hit the log 2 floor
    let tiny = MultiplicativeDrift { b: 0.0, k: 0.1, c: 1.0 };
    assert_eq!(tiny.norms(1.0, 0.0, 0.0).cal_c, 1.0);
}

#[test]
fn psi_alpha_conversion_is_identity_at_one() {
    assert_eq!(psi_alpha_from_psi1(1.0, 3.0), 3.0);
    assert!(psi_alpha_from_psi1(0.5, 3.0) > 3.0);
}

proptest! {
    #[test]
    fn r_decreases_in_delta(d1 in 1e-6f64..1.0, d2 in 1e-6f64..1.0) {
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(solve_r(lo).unwrap() >= solve_r(hi).unwrap() - 1e-9);
    }

    #[test]
    fn orlicz_combination_is_monotone(
        a in 0.0f64..100.0, b in 0.0f64..100.0, c in 0.0f64..100.0, d in 0.0f64..100.0,
        bump in 0.0f64..10.0, alpha in 0.05f64..1.0, r in 1.0f64..5.0,
    ) {
        let base = combine_orlicz(alpha, &ExcursionNorms { cal_a: a, cal_b: b, cal_c: c, cal_d: d }, r).unwrap();
        let up = combine_orlicz(alpha, &ExcursionNorms { cal_a: a + bump, cal_b: b + bump, cal_c: c + bump, cal_d: d + bump }, r).unwrap();
        prop_assert!(up.0 >= base.0 * (1.0 - 1e-12));
        prop_assert!(up.1 >= base.1 * (1.0 - 1e-12));
        prop_assert!(up.2 >= base.2 * (1.0 - 1e-12));
        prop_assert!(base.0 >= base.2 * (1.0 - 1e-12));
    }

    #[test]
    fn drift_norms_grow_with_b_k_and_kappa(
        lam in 0.01f64..0.9, b in 0.0f64..50.0, k in 1.0f64..50.0, kappa in 0.0f64..5.0,
        s in 0.1f64..4.0, bump in 0.0f64..5.0, pi_c in 0.05f64..1.0,
    ) {
        let start = StartPoint { v_x: k, in_c: true };
        let base = geometric_drift_norms(&GeometricDrift { lambda: lam, b, k }, kappa, s, start, pi_c).unwrap().norms;
        let up = geometric_drift_norms(&GeometricDrift { lambda: lam, b: b + bump, k: k + bump }, kappa + bump, s, StartPoint { v_x: k + bump, in_c: true }, pi_c).unwrap().norms;
        prop_assert!(up.cal_a >= base.cal_a * (1.0 - 1e-12));
        prop_assert!(up.cal_b >= base.cal_b * (1.0 - 1e-12));
        prop_assert!(up.cal_c >= base.cal_c * (1.0 - 1e-12));
    }
}
