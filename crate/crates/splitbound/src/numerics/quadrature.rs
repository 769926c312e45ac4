//! Globally adaptive Gauss-Kronrod (7/15 point) quadrature.

use thiserror::Error;

/// Default absolute tolerance for every integral computed in the crate.
pub const ABS_TOL: f64 = 1e-10;

const MAX_INTERVALS: usize = 5000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature on [{a}, {b}] did not reach tolerance {tol:e} (estimated error {err:e})")]
    NotConverged { a: f64, b: f64, tol: f64, err: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Piece, QuadratureError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };
    let fc = eval(c)?;
    let mut kron = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XK[j];
        let s = eval(c - dx)? + eval(c + dx)?;
        kron += WK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok(Piece { a, b, value: kron * h, err: ((kron - gauss) * h).abs() })
}

/// Integral of `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let mut pieces = vec![gk15(&f, a, b)?];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.err).sum();
        if total_err <= tol {
            return Ok(pieces.iter().map(|p| p.value).sum());
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.err > acc.1 { (i, p.err) } else { acc });
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if pieces.len() >= MAX_INTERVALS || mid <= p.a || mid >= p.b {
            return Err(QuadratureError::NotConverged { a, b, tol, err: total_err });
        }
        pieces.push(gk15(&f, p.a, mid)?);
        pieces.push(gk15(&f, mid, p.b)?);
    }
}

/// Integral over consecutive intervals between sorted `points`, sharing the
/// tolerance evenly. Useful when the integrand has kinks at known places.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> Result<f64, QuadratureError> {
    let mut pts: Vec<f64> = points.to_vec();
    pts.sort_by(|x, y| x.partial_cmp(y).expect("NaN breakpoint"));
    pts.dedup();
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let share = tol / (pts.len() - 1) as f64;
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += integrate(&f, w[0], w[1], share)?;
    }
    Ok(total)
}

/// Integral of `f` over `[a, inf)` through the substitution `x = a + u/(1-u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<f64, QuadratureError> {
    let g = |u: f64| {
        let one_minus = 1.0 - u;
        let x = a + u / one_minus;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v / (one_minus * one_minus)
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-13).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let v = integrate_breaks(|x: f64| (-x.abs()).exp(), &[-5.0, 0.0, 5.0], 1e-12).unwrap();
        let exact = 2.0 * (1.0 - (-5f64).exp());
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn semi_infinite_gaussian_tail() {
        let v = integrate_to_infinity(|x: f64| (-x * x / 2.0).exp(), 0.0, 1e-12).unwrap();
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-10);
        let w = integrate_to_infinity(|x: f64| (-x).exp(), 3.0, 1e-12).unwrap();
        assert!((w - (-3f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn reports_failure_on_singular_integrand() {
        let r = integrate(|x: f64| 1.0 / (x - 0.3).abs(), -1.0, 1.0, 1e-10);
        assert!(r.is_err(), "{r:?}");
    }
}
