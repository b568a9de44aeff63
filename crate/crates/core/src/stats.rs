//! Interval estimates used by the frequency and advantage measurements.

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided standard-normal quantile for the given confidence level.
pub fn z_two_sided(confidence: f64) -> f64 {
    assert!(confidence > 0.0 && confidence < 1.0, "confidence must be in (0, 1)");
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(0.5 + confidence / 2.0)
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0, "trials must be positive");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_two_sided(confidence);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Clamp so rounding never leaves `p` outside its own interval.
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Hoeffding radius: with probability at least `1 - delta` an empirical mean
/// of `n` samples in `[0,1]` lies within this distance of its expectation.
pub fn hoeffding_radius(n: u64, delta: f64) -> f64 {
    assert!(n > 0);
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Smallest `n` whose Hoeffding radius at `delta` is at most `radius`.
pub fn hoeffding_samples(radius: f64, delta: f64) -> u64 {
    assert!(radius > 0.0);
    ((2.0 / delta).ln() / (2.0 * radius * radius)).ceil() as u64
}

pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
