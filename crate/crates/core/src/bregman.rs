//! Bernoulli as an exponential family in Bregman-divergence form, and its
//! scaled variant. These identities back the objective's derivation and are
//! used for verification only; fitting never touches `β`.

use alloc::format;

use crate::error::{invalid, Result};
use crate::numeric::softplus;

/// `φ(x) = x log x + (1 - x) log(1 - x)` with `0 log 0 = 0`.
pub fn bernoulli_phi(x: f64) -> f64 {
    xlogx(x) + xlogx(1.0 - x)
}

#[inline]
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * libm::log(x)
    }
}

/// `d_φ(x, q) = x log(x/q) + (1 - x) log((1 - x)/(1 - q))`.
///
/// Each term is evaluated as `x (log x - log q)` so that at binary `x` the
/// value is exactly `-log q` or `-log(1 - q)`.
pub fn bernoulli_bregman(x: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("mean parameter must lie in (0, 1), got {q}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("point must lie in [0, 1], got {x}")));
    }
    let pos = if x == 0.0 { 0.0 } else { x * (libm::log(x) - libm::log(q)) };
    let nx = 1.0 - x;
    let neg = if nx == 0.0 {
        0.0
    } else {
        nx * (libm::log(nx) - libm::log(1.0 - q))
    };
    // Rounding can produce -0.0 or a negative ulp near x = q.
    Ok((pos + neg).max(0.0))
}

/// Scaled Bernoulli log-partition `ψ̃(η̃) = β log(1 + exp(η̃ / β))`.
pub fn scaled_log_partition(eta_tilde: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("scale must be positive, got {beta}")));
    }
    Ok(beta * softplus(eta_tilde / beta))
}
