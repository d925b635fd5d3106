//! Small Gaussian helpers shared across modules.

use std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal survival function, accurate in the far upper tail.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// P(X > threshold) for X ~ Normal(mean, std). A degenerate std of zero
/// falls back to the indicator on the mean.
pub fn exceed_prob(threshold: f64, mean: f64, std: f64) -> f64 {
    if std <= 0.0 {
        return if mean > threshold { 1.0 } else { 0.0 };
    }
    sf((threshold - mean) / std)
}
