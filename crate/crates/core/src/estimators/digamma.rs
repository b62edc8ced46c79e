use crate::error::{Error, Result};

/// Digamma function psi(x) = d/dx ln Gamma(x) for `x > 0`.
///
/// Shifts the argument up to `x >= 10` with psi(x) = psi(x + 1) - 1/x, then
/// applies the asymptotic series through the x^-14 term. Absolute error is
/// below 1e-13 over the estimator's working range.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("digamma argument {x} must be finite and > 0")));
    }
    Ok(psi(x))
}

pub(crate) fn psi(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli tail: B_2k / (2k x^2k), k = 1..7
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    x.ln() - 0.5 * inv - tail - shift
}
