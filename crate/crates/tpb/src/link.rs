//! The logistic link `f(β) = 1/(1+e^(-β))`, its inverse and derivative, and
//! the iterated logarithm `log*`.
//!
//! All reward probabilities in this crate pass through `f`; the policy's
//! good-epoch predicate is exactly "every empirical mean lies strictly inside
//! (0, 1)", which is why [`logit`] treats out-of-range inputs as an error
//! instead of clamping.

use crate::error::{Error, Result};

/// Logistic link: `f(β) = 1/(1+e^(-β))`, strictly increasing onto (0, 1).
///
/// Panics on non-finite input; every caller feeds it finite qualities.
pub fn logistic(beta: f64) -> f64 {
    assert!(beta.is_finite(), "logistic: beta must be finite");
    // Evaluate from the side that keeps the exponent non-positive.
    if beta >= 0.0 {
        1.0 / (1.0 + (-beta).exp())
    } else {
        let e = beta.exp();
        e / (1.0 + e)
    }
}

/// Inverse link: `logit(p) = ln(p/(1-p))` for `p` strictly inside (0, 1).
///
/// `p ∉ (0,1)` is a domain error, not a clamp: it is the bad-epoch trigger.
/// `ln(1-p)` goes through `ln_1p` so no precision is lost forming `1-p`;
/// the remaining round-trip error is the quantization of `p` itself, which
/// grows like `ulp(1)·e^|β|` once the link saturates.
pub fn logit(p: f64) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::NonFinite("logit argument"));
    }
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::LogitDomain(p));
    }
    Ok(p.ln() - (-p).ln_1p())
}

/// Derivative of the link: `f'(β) = f(β)(1-f(β))`, unimodal and symmetric
/// with maximum 1/4 at β = 0.
pub fn logistic_derivative(beta: f64) -> f64 {
    let p = logistic(beta);
    p * (1.0 - p)
}

/// Iterated logarithm: 0 if `x ≤ 1`, else `1 + log*(ln x)`. Natural log.
pub fn iterated_log(x: f64) -> u32 {
    assert!(!x.is_nan(), "iterated_log: x must not be NaN");
    let mut x = x;
    let mut count = 0u32;
    while x > 1.0 {
        x = x.ln();
        count += 1;
    }
    count
}
