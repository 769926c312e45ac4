//! Closed-form tail bounds, each returned as a [`TailBoundCurve`].

use std::collections::BTreeMap;
use std::f64::consts::E;

use super::curve::{Shape, TailBoundCurve};
use super::BoundError;
use crate::constants::BlockNormSet;
use crate::numerics::{gamma, log_floor_e};

macro_rules! params {
    ($($k:ident),* $(,)?) => {{
        let mut m = BTreeMap::new();
        $( m.insert(stringify!($k).to_string(), $k as f64); )*
        m
    }};
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<(), BoundError> {
    if cond {
        Ok(())
    } else {
        Err(BoundError::InvalidParameter(msg()))
    }
}

fn nonneg(name: &str, v: f64) -> Result<(), BoundError> {
    need(v >= 0.0 && v.is_finite(), || format!("{name} = {v} must be finite and non-negative"))
}

fn check_alpha(alpha: f64) -> Result<(), BoundError> {
    need(alpha > 0.0 && alpha <= 1.0, || format!("alpha = {alpha} must lie in (0, 1]"))
}

/// Truncation level `c (3 alpha^{-2} log x)^{1/alpha}` with `log x := log(max(x, e))`.
pub fn truncation_level(c: f64, alpha: f64, x: f64) -> f64 {
    c * (3.0 / (alpha * alpha) * log_floor_e(x)).powf(1.0 / alpha)
}

/// `D_eps = (1 + 1/eps)(3 + 4/eps)`.
pub fn d_eps(eps: f64) -> f64 {
    (1.0 + 1.0 / eps) * (3.0 + 4.0 / eps)
}

/// `exp(-(t/c')^alpha)` written as `exp(-x^alpha / (2 c^alpha))` needs
/// `c' = 2^{1/alpha} c`.
fn half_scale(c: f64, alpha: f64) -> f64 {
    2f64.powf(1.0 / alpha) * c
}

/// `exp(-t^2 / (4 n c^2 + 2 c t))` for sums of `n` independent centred
/// variables with `psi_1` norm at most `c`.
pub fn bernstein_psi1(c: f64, n: f64) -> Result<TailBoundCurve, BoundError> {
    need(c > 0.0, || format!("c = {c} must be positive"))?;
    nonneg("n", n)?;
    Ok(TailBoundCurve::new("bernstein_psi1", params!(c, n))
        .term("bernstein", 1.0, Shape::Bernstein { weight: 1.0, var: 4.0 * n * c * c, lin: 2.0 * c }))
}

/// The two terms shared by the one-dependent and Markov block bounds.
fn onedep_terms(curve: TailBoundCurve, c: f64, sigma2: f64, n: u64, m: u64, alpha: f64) -> TailBoundCurve {
    let big_m = truncation_level(c, alpha, n as f64 / m as f64);
    let blocks = n.div_ceil(2 * m) as f64;
    curve
        .term("truncated_tail", 2.0 * E.powi(8), Shape::Weibull { scale: half_scale(4.0 * c, alpha), alpha })
        .term(
            "subgaussian",
            4.0,
            Shape::Bernstein { weight: 1.0 / 32.0, var: blocks * sigma2, lin: big_m / 6.0 },
        )
}

/// Maximal partial sums of a one-dependent centred sequence of block sums.
pub fn independent_onedep(c: f64, sigma2: f64, n: u64, m: u64, alpha: f64) -> Result<TailBoundCurve, BoundError> {
    check_alpha(alpha)?;
    nonneg("c", c)?;
    nonneg("sigma2", sigma2)?;
    need(m >= 1 && n >= 1, || "n and m must be positive".into())?;
    let base = TailBoundCurve::new("independent_onedep", params!(c, sigma2, n, m, alpha));
    Ok(onedep_terms(base, c, sigma2, n, m, alpha))
}

/// Sums of independent blocks up to a stopping time `N` whose excess over
/// `a_center` has `psi_1` norm `psi1_excess`.
#[allow(clippy::too_many_arguments)]
pub fn independent_stopped(
    c: f64,
    sigma2: f64,
    n: f64,
    alpha: f64,
    eps: f64,
    a_center: f64,
    psi1_excess: f64,
    p: f64,
) -> Result<TailBoundCurve, BoundError> {
    check_alpha(alpha)?;
    need(eps > 0.0 && eps < 1.0, || format!("eps = {eps} must lie in (0, 1)"))?;
    need(p > 1.0, || format!("p = {p} must exceed 1"))?;
    for (k, v) in [("c", c), ("sigma2", sigma2), ("a_center", a_center), ("psi1_excess", psi1_excess)] {
        nonneg(k, v)?;
    }
    let q = p / (p - 1.0);
    let big_m = truncation_level(c, alpha, n);
    let mu = stopped_mu(big_m, sigma2, eps, psi1_excess);
    let lin = if mu.is_infinite() { 0.0 } else { 1.0 / (mu * q) };
    Ok(TailBoundCurve::new("independent_stopped", params!(c, sigma2, n, alpha, eps, a_center, psi1_excess, p, q, mu))
        .term("truncated_tail", E.powi(8), Shape::Weibull { scale: p * half_scale(c, alpha), alpha })
        .term(
            "subgaussian",
            2f64.powf(1.0 + eps / (1.0 + eps)),
            Shape::Bernstein { weight: 1.0 / (2.0 * q * q), var: (1.0 + eps) * a_center * sigma2, lin },
        ))
}

/// `min(3 / (4 M (1+eps)), sqrt(eps) / ((1+eps) sigma sqrt(psi1_excess)))`;
/// an empty branch (zero denominator) is infinite.
pub fn stopped_mu(big_m: f64, sigma2: f64, eps: f64, psi1_excess: f64) -> f64 {
    let first = 3.0 / (4.0 * big_m * (1.0 + eps));
    let den = (1.0 + eps) * sigma2.sqrt() * psi1_excess.sqrt();
    let second = if den == 0.0 { f64::INFINITY } else { eps.sqrt() / den };
    first.min(second)
}

/// Bounded classes, `P(S* >= E S + t)` with no free parameter.
pub fn klein_rio(sigma2: f64, n: f64, big_m: f64, es: f64) -> Result<TailBoundCurve, BoundError> {
    for (k, v) in [("sigma2", sigma2), ("n", n), ("M", big_m), ("ES", es)] {
        nonneg(k, v)?;
    }
    Ok(TailBoundCurve::new("klein_rio", params!(sigma2, n, big_m, es)).term(
        "bernstein",
        1.0,
        Shape::Bernstein { weight: 1.0, var: 2.0 * sigma2 * n + 4.0 * es * big_m, lin: 3.0 * big_m },
    ))
}

/// Bounded classes, `P(S* >= (1+eps) E S + t)`.
pub fn klein_rio_eps(sigma2: f64, n: f64, big_m: f64, eps: f64) -> Result<TailBoundCurve, BoundError> {
    need(eps > 0.0, || format!("eps = {eps} must be positive"))?;
    for (k, v) in [("sigma2", sigma2), ("n", n), ("M", big_m)] {
        nonneg(k, v)?;
    }
    Ok(TailBoundCurve::new("klein_rio_eps", params!(sigma2, n, big_m, eps))
        .term("subgaussian", 1.0, Shape::Bernstein { weight: 1.0 / (2.0 * (1.0 + eps)), var: n * sigma2, lin: 0.0 })
        .term("exponential", 1.0, Shape::Weibull { scale: big_m * d_eps(eps), alpha: 1.0 }))
}

/// Unbounded classes of i.i.d. summands with a `psi_alpha` envelope,
/// `P(S* >= (1+eps) E S + t)`.
pub fn truncated_empirical(c: f64, sigma2: f64, n: f64, alpha: f64, eps: f64) -> Result<TailBoundCurve, BoundError> {
    check_alpha(alpha)?;
    need(eps > 0.0 && eps < 0.5, || format!("eps = {eps} must lie in (0, 1/2)"))?;
    nonneg("c", c)?;
    nonneg("sigma2", sigma2)?;
    let big_m = truncation_level(c, alpha, n);
    let k = 1.0 - 2.0 * eps;
    Ok(TailBoundCurve::new("truncated_empirical", params!(c, sigma2, n, alpha, eps, big_m))
        .term(
            "subgaussian",
            1.0,
            Shape::Bernstein { weight: k * k / (2.0 * (1.0 + eps)), var: n * sigma2, lin: 0.0 },
        )
        .term("exponential", E, Shape::Weibull { scale: 2.0 * big_m * d_eps(eps) / k, alpha: 1.0 })
        .term("truncated_tail", E.powi(8), Shape::Weibull { scale: half_scale(c, alpha) / eps, alpha }))
}

/// Additive functionals of a split chain with `m`-step minorization, indexed
/// so that the curve at `t` bounds `P(|S| > 3t)`.
#[allow(clippy::too_many_arguments)]
pub fn general_markov(
    a: f64,
    b: f64,
    c: f64,
    sigma2: f64,
    pi_theta: f64,
    n: u64,
    m: u64,
    alpha: f64,
) -> Result<TailBoundCurve, BoundError> {
    check_alpha(alpha)?;
    need(pi_theta > 0.0 && pi_theta <= 1.0, || format!("pi_theta = {pi_theta} must lie in (0, 1]"))?;
    need(m >= 1, || "m must be positive".into())?;
    if !n.is_multiple_of(m) {
        return Err(BoundError::NotMultiple { n, m });
    }
    for (k, v) in [("a", a), ("b", b), ("c", c), ("sigma2", sigma2)] {
        nonneg(k, v)?;
    }
    let mut curve = TailBoundCurve::new("general_markov", params!(a, b, c, sigma2, pi_theta, n, m, alpha))
        .term("initial", 2.0, Shape::Weibull { scale: a, alpha })
        .term("final", 2.0 / pi_theta, Shape::Weibull { scale: b, alpha });
    curve = onedep_terms(curve, c, sigma2, n, m, alpha);
    curve.deviation_scale = 3.0;
    Ok(curve)
}

/// The `(p, q, eps)` bound for strongly aperiodic geometrically ergodic
/// chains, `sigma2 = pi*(theta) E s_0^2`.
#[allow(clippy::too_many_arguments)]
pub fn geometric_pq(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    sigma2: f64,
    pi_theta: f64,
    n: f64,
    alpha: f64,
    q: f64,
    eps: f64,
) -> Result<TailBoundCurve, BoundError> {
    check_alpha(alpha)?;
    need(q > 1.0, || format!("q = {q} must exceed 1"))?;
    need(eps > 0.0 && eps < 1.0, || format!("eps = {eps} must lie in (0, 1)"))?;
    need(pi_theta > 0.0 && pi_theta <= 1.0, || format!("pi_theta = {pi_theta} must lie in (0, 1]"))?;
    for (k, v) in [("a", a), ("b", b), ("c", c), ("d", d), ("sigma2", sigma2)] {
        nonneg(k, v)?;
    }
    let p = q / (q - 1.0);
    let big_m = (4.0 * truncation_level(c, alpha, n) * (1.0 + eps) / 3.0)
        .max(12.0 * pi_theta * d * (1.0 + eps) * sigma2.sqrt() / eps);
    let q2 = q * q;
    Ok(TailBoundCurve::new("geometric_pq", params!(a, b, c, d, sigma2, pi_theta, n, alpha, p, q, eps, big_m))
        .term("initial", 2.0, Shape::Weibull { scale: 2.0 * a * p, alpha })
        .term("final", 2.0 / pi_theta, Shape::Weibull { scale: 2.0 * b * p, alpha })
        .term("truncated_tail", E.powi(8), Shape::Weibull { scale: p * q * half_scale(c, alpha), alpha })
        .term(
            "subgaussian",
            2f64.powf(1.0 + eps / (1.0 + eps)),
            Shape::Bernstein { weight: 1.0 / (2.0 * q2 * q2), var: (1.0 + eps) * sigma2 * n, lin: big_m / q2 },
        ))
}

/// `M(eta) = (1+eta)^{3/4} max(4 c (3 alpha^{-2} log n)^{1/alpha} / 3, 29 pi* d sigma / eta)`.
pub fn geometric_m(c: f64, d: f64, sigma2: f64, pi_theta: f64, n: f64, alpha: f64, eta: f64) -> f64 {
    (1.0 + eta).powf(0.75)
        * (4.0 * truncation_level(c, alpha, n) / 3.0).max(29.0 * pi_theta * d * sigma2.sqrt() / eta)
}

/// The single-parameter geometric bound, `eta in (0, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn geometric(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    sigma2: f64,
    pi_theta: f64,
    n: f64,
    alpha: f64,
    eta: f64,
) -> Result<TailBoundCurve, BoundError> {
    check_alpha(alpha)?;
    need(eta > 0.0 && eta <= 1.0, || format!("eta = {eta} must lie in (0, 1]"))?;
    need(pi_theta > 0.0 && pi_theta <= 1.0, || format!("pi_theta = {pi_theta} must lie in (0, 1]"))?;
    for (k, v) in [("a", a), ("b", b), ("c", c), ("d", d), ("sigma2", sigma2)] {
        nonneg(k, v)?;
    }
    let big_m = geometric_m(c, d, sigma2, pi_theta, n, alpha, eta);
    Ok(TailBoundCurve::new("geometric", params!(a, b, c, d, sigma2, pi_theta, n, alpha, eta, big_m))
        .term("initial", 2.0, Shape::Weibull { scale: 25.0 * a / eta, alpha })
        .term("final", 2.0 / pi_theta, Shape::Weibull { scale: 25.0 * b / eta, alpha })
        .term("truncated_tail", E.powi(8), Shape::Weibull { scale: 14.0 * half_scale(c, alpha) / eta, alpha })
        .term(
            "subgaussian",
            2f64.powf(1.0 + eta / (2.0 + eta)),
            Shape::Bernstein { weight: 0.5, var: (1.0 + eta) * sigma2 * n, lin: big_m },
        ))
}

/// The geometric bound fed by a certificate, with the certified variance cap
/// in place of the unknown asymptotic variance.
pub fn theorem_a(cert: &BlockNormSet, n: f64, eta: f64) -> Result<TailBoundCurve, BoundError> {
    let mut curve = geometric(cert.a, cert.b, cert.c, cert.d, cert.sigma_cap, cert.pi_theta, n, cert.alpha, eta)?;
    curve.family = "theorem_a".into();
    curve.params.insert("r".into(), cert.r);
    Ok(curve)
}

/// Tail of the number of regenerations before `n`, with the `psi_1` norm of
/// its excess over `(1+eps) pi*(theta) n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NDeviation {
    pub n: f64,
    pub pi_theta: f64,
    pub d: f64,
    pub eps: f64,
}

impl NDeviation {
    pub fn new(n: f64, pi_theta: f64, d: f64, eps: f64) -> Result<Self, BoundError> {
        need(eps > 0.0 && eps < 1.0, || format!("eps = {eps} must lie in (0, 1)"))?;
        need(pi_theta > 0.0 && pi_theta <= 1.0, || format!("pi_theta = {pi_theta} must lie in (0, 1]"))?;
        need(d > 0.0, || format!("d = {d} must be positive"))?;
        Ok(NDeviation { n, pi_theta, d, eps })
    }

    /// Smallest integer `k` covered by the tail estimate.
    pub fn first_k(&self) -> u64 {
        (self.pi_theta * self.n * (1.0 + self.eps)).ceil() as u64
    }

    /// Bound on `P(N > k)`; 1 below [`NDeviation::first_k`].
    pub fn tail(&self, k: u64) -> f64 {
        if k < self.first_k() {
            return 1.0;
        }
        let scale = 36.0 * self.pi_theta * self.pi_theta * self.d * self.d / self.eps;
        (-(k as f64 - self.pi_theta * self.n) / scale).exp().min(1.0)
    }

    pub fn psi1_excess(&self) -> f64 {
        144.0 * self.pi_theta * self.pi_theta * self.d * self.d / self.eps
    }
}

/// Bounds on the expected sizes of the initial and final incomplete blocks,
/// `(E U, E W)`.
pub fn uw_expectation_bounds(a: f64, b: f64, pi_theta: f64, alpha: f64) -> (f64, f64) {
    let g = gamma(1.0 + 1.0 / alpha);
    let eu = 2.0 * g * a;
    let ew = 2f64.powf(1.0 / alpha) * E * g * (E / pi_theta).ln().powf(1.0 / alpha) * b;
    (eu, ew)
}

/// Threshold `C(eps)` above which the empirical-process bound applies.
#[allow(clippy::too_many_arguments)]
pub fn empirical_threshold(a: f64, b: f64, d: f64, e: f64, pi_theta: f64, pi_f: f64, alpha: f64, eps: f64) -> f64 {
    let g = gamma(1.0 + 1.0 / alpha);
    let envelope = (9.0 + 9.0 * e + 27.0 * pi_theta * d * d / eps) * pi_f;
    let initial = 9.0 * g * a;
    let fin = 9.0 * 2f64.powf(1.0 / alpha - 1.0) * E * g * (E / pi_theta).ln().powf(1.0 / alpha) * b;
    (envelope + initial + fin) / eps
}

/// Parameters of the empirical-process bound for a class with envelope `F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalInputs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub sigma2: f64,
    pub pi_theta: f64,
    pub pi_f: f64,
    pub n: f64,
    pub alpha: f64,
    pub eps: f64,
}

impl EmpiricalInputs {
    fn validate(&self) -> Result<(), BoundError> {
        check_alpha(self.alpha)?;
        need(self.eps > 0.0 && self.eps < 0.5, || format!("eps = {} must lie in (0, 1/2)", self.eps))?;
        need(self.pi_theta > 0.0 && self.pi_theta <= 1.0, || format!("pi_theta = {} must lie in (0, 1]", self.pi_theta))?;
        for (k, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d), ("e", self.e), ("sigma2", self.sigma2), ("pi_F", self.pi_f), ("n", self.n)] {
            nonneg(k, v)?;
        }
        Ok(())
    }

    fn params(&self) -> BTreeMap<String, f64> {
        let EmpiricalInputs { a, b, c, d, e, sigma2, pi_theta, pi_f, n, alpha, eps } = *self;
        params!(a, b, c, d, e, sigma2, pi_theta, pi_f, n, alpha, eps)
    }
}

/// Six-term bound on `P(Z >= (1+7 eps) E Z + t)` for the supremum `Z` of
/// a countable class of centred functions; equal to 1 below `C(eps)`.
pub fn empirical_process(inp: &EmpiricalInputs) -> Result<TailBoundCurve, BoundError> {
    inp.validate()?;
    let EmpiricalInputs { a, b, c, d, e, sigma2, pi_theta, pi_f, n, alpha, eps } = *inp;
    let big_m = truncation_level(c, alpha, n);
    let k = 1.0 - 2.0 * eps;
    let mut params = inp.params();
    params.insert("big_m".into(), big_m);
    let mut curve = TailBoundCurve::new("empirical_process", params)
        .term(
            "subgaussian",
            1.0,
            Shape::Bernstein { weight: k.powi(4) / (2.0 * (1.0 + eps).powi(2)), var: n * sigma2, lin: 0.0 },
        )
        .term("exponential", E, Shape::Weibull { scale: 2.0 * big_m * d_eps(eps) / (k * k), alpha: 1.0 })
        .term("truncated_tail", E.powi(8), Shape::Weibull { scale: half_scale(c, alpha) / (eps * k), alpha })
        .term("regenerations", E, Shape::Constant { exponent: eps * eps * n / (144.0 * pi_theta * d * d) })
        .term("initial", 2.0, Shape::Weibull { scale: 2.0 * a / eps, alpha })
        .term("final", 2.0 / pi_theta, Shape::Weibull { scale: 2.0 * b / eps, alpha });
    curve.valid_from = empirical_threshold(a, b, d, e, pi_theta, pi_f, alpha, eps);
    Ok(curve)
}

/// Bound on `E ||sum_{i<n} G(X_i)||` for a centred Hilbert-valued `G` whose
/// norm has parameters `a, b, c`.
pub fn hilbert_expectation(a: f64, b: f64, c: f64, pi_theta: f64, alpha: f64, n: f64) -> f64 {
    let (eu, ew) = uw_expectation_bounds(a, b, pi_theta, alpha);
    eu + ew + 4.0 * alpha.powf(-0.5) * gamma(2.0 / alpha).sqrt() * c * n.sqrt()
}

/// Law-of-large-numbers form for the Hilbert example: the curve at `t`
/// bounds `P(||(1/n) sum G|| >= (1+7 eps) E/n + t)`, with `E` from
/// [`hilbert_expectation`] stored as `expectation_bound`.
pub fn hilbert_lln(inp: &EmpiricalInputs) -> Result<TailBoundCurve, BoundError> {
    let base = empirical_process(inp)?;
    let n = inp.n;
    need(n > 0.0, || "n must be positive".into())?;
    let mut curve = TailBoundCurve::new("hilbert_lln", base.params.clone());
    curve.params.insert(
        "expectation_bound".into(),
        hilbert_expectation(inp.a, inp.b, inp.c, inp.pi_theta, inp.alpha, n),
    );
    for term in base.terms {
        let shape = match term.shape {
            Shape::Weibull { scale, alpha } => Shape::Weibull { scale: scale / n, alpha },
            Shape::Bernstein { weight, var, lin } => Shape::Bernstein { weight, var: var / (n * n), lin: lin / n },
            s @ Shape::Constant { .. } => s,
        };
        curve = curve.term(&term.label, term.prefactor, shape);
    }
    curve.valid_from = base.valid_from / n;
    Ok(curve)
}
