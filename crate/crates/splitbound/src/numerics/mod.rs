//! Numerical building blocks shared by the rest of the crate.

mod quadrature;
mod root;
mod stream;

pub use quadrature::{integrate, integrate_breaks, integrate_to_infinity, QuadratureError, ABS_TOL};
pub use root::bisect;
pub use stream::{replica_rng, ReplicaRng};

/// Gamma function. Backed by the Lanczos approximation in `statrs`.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Natural log of the Gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Error function (musl port, accurate to about one ulp).
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// `log(max(n, e))`, the logarithm convention used wherever `log n` enters a
/// truncation level.
pub fn log_floor_e(n: f64) -> f64 {
    n.max(std::f64::consts::E).ln()
}
