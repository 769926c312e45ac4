//! From drift certificates to the constants `a, b, c, d, e` that feed the
//! tail bounds.
//!
//! The calligraphic quantities `calA .. calD` are Orlicz norms of excursion
//! sums (from the initial law, from stationarity, and from the small set);
//! [`combine_orlicz`] turns them into `a, b, c` for the split chain.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{bisect, gamma};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConstantsError {
    #[error("delta = {0} must lie in (0, 1]")]
    InvalidDelta(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), ConstantsError> {
    if cond {
        Ok(())
    } else {
        Err(ConstantsError::InvalidInput(msg()))
    }
}

/// Upper bound on the splitting root: `log(6/(2-delta)) / log(2/(2-delta))`.
pub fn r_upper_bound(delta: f64) -> f64 {
    (6.0 / (2.0 - delta)).ln() / (2.0 / (2.0 - delta)).ln()
}

/// Left side minus right side of the splitting equation
/// `2^{1/r} delta^{1-1/r} + 2^{1+1/r} (1-delta)^{1-1/r} = 2`.
pub fn r_equation(delta: f64, r: f64) -> f64 {
    let e = 1.0 - 1.0 / r;
    let second = if delta >= 1.0 { 0.0 } else { 2f64.powf(1.0 + 1.0 / r) * (1.0 - delta).powf(e) };
    2f64.powf(1.0 / r) * delta.powf(e) + second - 2.0
}

/// The root `r >= 1` of the splitting equation. Equals 1 at `delta = 1`.
pub fn solve_r(delta: f64) -> Result<f64, ConstantsError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(ConstantsError::InvalidDelta(delta));
    }
    if delta == 1.0 {
        return Ok(1.0);
    }
    // The left side decreases in r from 4 at r = 1 to -delta as r grows, and
    // the closed-form upper bound already has the right sign.
    let hi = r_upper_bound(delta) * (1.0 + 1e-12) + 1e-12;
    bisect(|r| r_equation(delta, r), 1.0, hi, 400).ok_or(ConstantsError::InvalidDelta(delta))
}

/// `(x^alpha + y^alpha)^{1/alpha}`, the quasi-triangle inequality for
/// `psi_alpha` norms.
pub fn orlicz_sum(alpha: f64, x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    (x.powf(alpha) + y.powf(alpha)).powf(1.0 / alpha)
}

/// Converts a `psi_1` norm into a `psi_alpha` norm bound,
/// `(1/log 2)^{(1-alpha)/alpha} psi_1`.
pub fn psi_alpha_from_psi1(alpha: f64, psi1: f64) -> f64 {
    (1.0 / LN_2).powf((1.0 - alpha) / alpha) * psi1
}

/// Excursion norms of a function along the skeleton.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionNorms {
    #[serde(rename = "calA")]
    pub cal_a: f64,
    #[serde(rename = "calB")]
    pub cal_b: f64,
    #[serde(rename = "calC")]
    pub cal_c: f64,
    #[serde(rename = "calD")]
    pub cal_d: f64,
}

/// `a, b, c` from the excursion norms and the splitting root.
pub fn combine_orlicz(alpha: f64, n: &ExcursionNorms, r: f64) -> Result<(f64, f64, f64), ConstantsError> {
    check(alpha > 0.0 && alpha <= 1.0, || format!("alpha = {alpha} must lie in (0, 1]"))?;
    check(r >= 1.0, || format!("r = {r} must be at least 1"))?;
    check(
        [n.cal_a, n.cal_b, n.cal_c, n.cal_d].iter().all(|v| *v >= 0.0 && v.is_finite()),
        || "excursion norms must be finite and non-negative".into(),
    )?;
    let lead = r.powf(1.0 / alpha);
    Ok((
        lead * orlicz_sum(alpha, n.cal_a.max(n.cal_c), n.cal_d),
        lead * orlicz_sum(alpha, n.cal_b.max(n.cal_c), n.cal_d),
        lead * orlicz_sum(alpha, n.cal_c, n.cal_d),
    ))
}

/// Drift constants `P V - V <= -lambda V + b 1_C`, `sup_C V = K`, `V >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricDrift {
    pub lambda: f64,
    pub b: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl GeometricDrift {
    fn validate(&self) -> Result<(), ConstantsError> {
        check(self.lambda > 0.0 && self.lambda < 1.0, || format!("lambda = {} must lie in (0, 1)", self.lambda))?;
        check(self.b >= 0.0 && self.k >= 1.0, || format!("need b >= 0 and K >= 1 (b = {}, K = {})", self.b, self.k))
    }

    fn log_rate(&self) -> f64 {
        (1.0 / (1.0 - self.lambda)).ln()
    }

    /// `b / (1 - lambda) + K`
    fn return_level(&self) -> f64 {
        self.b / (1.0 - self.lambda) + self.k
    }

    /// `b pi(C) / lambda`, an upper bound on `pi V` (never below 1 since `V >= 1`).
    pub fn pi_v_bound(&self, pi_c: f64) -> f64 {
        (self.b * pi_c / self.lambda).max(1.0)
    }
}

fn log2_floor1(z: f64) -> f64 {
    (z.ln() / LN_2).max(1.0)
}

/// Starting point of an excursion: either inside `C` or at a state with `V(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartPoint {
    pub v_x: f64,
    pub in_c: bool,
}

/// `psi_1` norms of the return time to `C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauNorms {
    pub from_x: f64,
    pub from_pi: f64,
    pub sup_c: f64,
}

pub fn tau_psi1_norms(drift: &GeometricDrift, start: StartPoint, pi_v: f64, pi_c: f64) -> Result<TauNorms, ConstantsError> {
    drift.validate()?;
    let l = drift.log_rate();
    let x_level = if start.in_c { drift.return_level() } else { start.v_x };
    Ok(TauNorms {
        from_x: log2_floor1(x_level) / l,
        from_pi: log2_floor1(pi_v + drift.return_level() * pi_c) / l,
        sup_c: log2_floor1(drift.return_level()) / l,
    })
}

/// `pi|g| / kappa` for `|g| <= kappa (log V)^s`.
pub fn pi_abs_g_over_kappa(drift: &GeometricDrift, s: f64, pi_c: f64) -> f64 {
    let l = drift.pi_v_bound(pi_c).ln();
    if s <= 1.0 {
        l.powf(s)
    } else {
        (l + s - 1.0).powf(s) - (s - 1.0).powf(s)
    }
}

/// Output of the geometric-drift pipeline for `|g| <= kappa (log V)^s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftNorms {
    pub alpha: f64,
    pub norms: ExcursionNorms,
    pub pi_abs_g: f64,
    pub pi_v: f64,
}

pub fn geometric_drift_norms(
    drift: &GeometricDrift,
    kappa: f64,
    s: f64,
    start: StartPoint,
    pi_c: f64,
) -> Result<DriftNorms, ConstantsError> {
    drift.validate()?;
    check(kappa >= 0.0 && s > 0.0, || format!("need kappa >= 0 and s > 0 (kappa = {kappa}, s = {s})"))?;
    check(pi_c > 0.0 && pi_c <= 1.0, || format!("pi(C) = {pi_c} must lie in (0, 1]"))?;
    let alpha = 1.0 / (s + 1.0);
    let (lam, b, k) = (drift.lambda, drift.b, drift.k);
    let pi_v = drift.pi_v_bound(pi_c);
    let ratio = pi_abs_g_over_kappa(drift, s, pi_c);
    let moment = LN_2.powf(-(1.0 - alpha)) * ratio.powf(alpha);
    let bracket = |z: f64| (log2_floor1(z).powf(1.0 - alpha) + moment).powf(1.0 / alpha);
    // Each norm is kappa times a return-time norm times a moment bracket.
    let tau = tau_psi1_norms(drift, start, pi_v, pi_c)?;
    let cal_a = kappa * tau.from_x * bracket(start.v_x / lam + b / lam);
    let cal_b = kappa * tau.from_pi * bracket(pi_v / lam + b / lam);
    let cal_c = kappa * tau.sup_c * bracket(b / lam + k / lam);
    Ok(DriftNorms {
        alpha,
        norms: ExcursionNorms { cal_a, cal_b, cal_c, cal_d: cal_c },
        pi_abs_g: kappa * ratio,
        pi_v,
    })
}

/// `d`, the `psi_1` bound on the regeneration time started in `C`.
pub fn bound_d(drift: &GeometricDrift, r: f64) -> f64 {
    2.0 * r * log2_floor1(drift.return_level()) / drift.log_rate()
}

/// `e`, the `psi_1` bound on the first regeneration time from `x`.
pub fn bound_e(drift: &GeometricDrift, r: f64, start: StartPoint) -> f64 {
    let x_level = if start.in_c { drift.return_level() } else { start.v_x };
    let inner = (x_level.ln() / LN_2).max(drift.return_level().ln() / LN_2).max(1.0);
    r * (inner + 1.0) / drift.log_rate()
}

/// Upper bound on the `L^2` norm of a block from its `psi_alpha` norm `c`:
/// `2 alpha^{-1/2} Gamma(2/alpha)^{1/2} c`.
pub fn sigma_upper(c: f64, alpha: f64) -> f64 {
    2.0 * alpha.powf(-0.5) * gamma(2.0 / alpha).sqrt() * c
}

/// Excursion norms under `P^m V - V <= -exp(h) + b 1_C` with `psi_beta`
/// integrable return times. `tau_*` are the `psi_beta` norms of the return
/// time (sup over `C`, from `x`, from `pi`), `c` the scale in `h`.
#[allow(clippy::too_many_arguments)]
pub fn regular_drift_norms(
    alpha: f64,
    beta: f64,
    b: f64,
    k: f64,
    c: f64,
    v_x: f64,
    pi_v: f64,
    tau_sup_c: f64,
    tau_x: f64,
    tau_pi: f64,
) -> Result<ExcursionNorms, ConstantsError> {
    check(alpha > 0.0 && alpha <= 1.0 && beta > alpha, || format!("need 0 < alpha <= 1 and beta > alpha (alpha = {alpha}, beta = {beta})"))?;
    let gam = alpha * beta / (beta - alpha);
    let factor = |z: f64| c * log2_floor1(z).powf(1.0 / gam);
    let cd = tau_sup_c * factor(b + k);
    Ok(ExcursionNorms { cal_a: tau_x * factor(v_x + b), cal_b: tau_pi * factor(pi_v + b), cal_c: cd, cal_d: cd })
}

/// Multiplicative drift `exp(-V) P^m exp(V) <= exp(-g + b 1_C)`.
///
/// `log_pi_half_exp_v` is `log pi(exp(V)/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativeDrift {
    pub b: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub c: f64,
}

impl MultiplicativeDrift {
    /// `E_x exp(sum of g over the excursion) <= exp(b 1_C(x) + V(x))`.
    pub fn excursion_moment_bound(&self, v_x: f64, in_c: bool) -> f64 {
        (if in_c { self.b } else { 0.0 } + v_x).exp()
    }

    /// Bound on `sup_C || sum |Z_k|^alpha ||_{psi_1}`.
    pub fn psi1_bound(&self) -> f64 {
        1f64.max((self.b + self.k) / LN_2) * self.c
    }

    pub fn norms(&self, alpha: f64, v_x: f64, log_pi_half_exp_v: f64) -> ExcursionNorms {
        let (b, k, c) = (self.b, self.k, self.c);
        let p = 1.0 / alpha;
        let cd = ((b + k).max(LN_2) / LN_2 * c).powf(p);
        ExcursionNorms {
            cal_a: ((2.0 * b + v_x + k).max(2.0 * LN_2) / (2.0 * LN_2) * c).powf(p),
            cal_b: ((2.0 * b + 2.0 * log_pi_half_exp_v + k).max(2.0 * LN_2) / (2.0 * LN_2) * c).powf(p),
            cal_c: cd,
            cal_d: cd,
        }
    }
}

/// How the stationary regeneration probability `pi*(theta)` enters the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PiThetaChoice {
    /// `1 / d`, from `pi*(theta)^{-1} <= d`.
    Drift,
    /// `delta pi(C)`, exact for `m = 1` when `pi(C)` is known.
    Exact,
    /// A supplied number, for instance a regeneration-rate estimate.
    Value(f64),
}

/// Where a set of block norms came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    GeometricDrift,
    RegularDrift,
    MultiplicativeDrift,
    Supplied,
}

/// Everything a bound evaluator needs, serialised as the certificate JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNormSet {
    pub alpha: f64,
    pub r: f64,
    #[serde(flatten)]
    pub norms: ExcursionNorms,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub pi_theta: f64,
    /// `pi*(theta) * sigma_upper(c)^2`, an upper bound on the asymptotic variance.
    pub sigma_cap: f64,
    pub provenance: Provenance,
    #[serde(default)]
    pub pi_abs_g: Option<f64>,
    #[serde(default)]
    pub pi_v: Option<f64>,
}

/// Inputs of the geometric-drift certification pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricInputs {
    pub drift: GeometricDrift,
    pub delta: f64,
    pub pi_c: f64,
    pub start: StartPoint,
    pub kappa: f64,
    pub s: f64,
    pub pi_theta: PiThetaChoice,
}

/// Runs the full chain `r -> calA..calD -> a, b, c -> d, e -> sigma cap`.
pub fn certify_geometric(inp: &GeometricInputs) -> Result<BlockNormSet, ConstantsError> {
    let r = solve_r(inp.delta)?;
    let dn = geometric_drift_norms(&inp.drift, inp.kappa, inp.s, inp.start, inp.pi_c)?;
    let (a, b, c) = combine_orlicz(dn.alpha, &dn.norms, r)?;
    let d = bound_d(&inp.drift, r);
    let e = bound_e(&inp.drift, r, inp.start);
    let pi_theta = match inp.pi_theta {
        PiThetaChoice::Drift => 1.0 / d,
        PiThetaChoice::Exact => inp.delta * inp.pi_c,
        PiThetaChoice::Value(v) => {
            check(v > 0.0 && v <= 1.0, || format!("pi*(theta) = {v} must lie in (0, 1]"))?;
            v
        }
    };
    let su = sigma_upper(c, dn.alpha);
    Ok(BlockNormSet {
        alpha: dn.alpha,
        r,
        norms: dn.norms,
        a,
        b,
        c,
        d,
        e,
        pi_theta,
        sigma_cap: pi_theta * su * su,
        provenance: Provenance::GeometricDrift,
        pi_abs_g: Some(dn.pi_abs_g),
        pi_v: Some(dn.pi_v),
    })
}

#[cfg(test)]
mod tests;
