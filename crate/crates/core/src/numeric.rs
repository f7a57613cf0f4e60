//! Stable scalar building blocks for the Bernoulli-logit likelihood.

/// Logits are clamped to this magnitude before any exponential.
pub const LOGIT_CLAMP: f64 = 500.0;

#[inline]
pub fn clamp_logit(a: f64) -> f64 {
    a.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
}

/// `1 / (1 + exp(-x))` without overflow for either sign.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let x = clamp_logit(x);
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` as `max(x, 0) + log1p(exp(-|x|))`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    let x = clamp_logit(x);
    x.max(0.0) + libm::log1p(libm::exp(-libm::fabs(x)))
}

/// Negative log-likelihood of one binary observation with logit `a`:
/// `softplus(a) - y * a`.
#[inline]
pub fn logit_loss(a: f64, y: u8) -> f64 {
    let a = clamp_logit(a);
    let sp = a.max(0.0) + libm::log1p(libm::exp(-libm::fabs(a)));
    if y == 1 {
        sp - a
    } else {
        sp
    }
}
