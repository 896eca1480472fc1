//! Black–Scholes call prices.

use statrs::distribution::{ContinuousCDF, Normal};

fn norm_cdf(x: f64) -> f64 {
    // Parameters are valid constants.
    Normal::standard().cdf(x)
}

/// European call on a dividend-paying underlying. `sigma == 0` gives the
/// discounted intrinsic value.
pub fn bs_call(s: f64, x: f64, tenor: f64, r: f64, q: f64, sigma: f64) -> f64 {
    debug_assert!(s > 0.0 && x > 0.0 && tenor > 0.0 && sigma >= 0.0);
    let fwd_s = s * (-q * tenor).exp();
    let disc_x = x * (-r * tenor).exp();
    let sd = sigma * tenor.sqrt();
    if sd == 0.0 {
        return (fwd_s - disc_x).max(0.0);
    }
    let d1 = ((s / x).ln() + (r - q + 0.5 * sigma * sigma) * tenor) / sd;
    let d2 = d1 - sd;
    fwd_s * norm_cdf(d1) - disc_x * norm_cdf(d2)
}
