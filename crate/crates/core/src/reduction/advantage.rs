//! Success probability of a distinguisher on challenges from `D_n`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::Side;
use crate::np_pair::NpPair;
use crate::seed::SeedStream;
use crate::stats::wilson_interval;

use super::distinguisher::Distinguisher;

pub const CONFIDENCE: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdvantageEstimate {
    pub success_prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
    pub successes: u64,
    /// Fraction of challenges answered by the fallback coin.
    pub failure_rate: f64,
}

/// Scores `(x ∈ U ∧ C(x) = 1) ∨ (x ∈ V ∧ C(x) = 0)` over `samples` draws,
/// with a 99% Wilson interval.
pub fn measure_advantage(dist: &Distinguisher, pair: &NpPair, samples: u64, stream: &SeedStream) -> AdvantageEstimate {
    measure_advantage_at(dist, pair, samples, CONFIDENCE, stream)
}

pub fn measure_advantage_at(
    dist: &Distinguisher,
    pair: &NpPair,
    samples: u64,
    confidence: f64,
    stream: &SeedStream,
) -> AdvantageEstimate {
    assert!(samples >= 1);
    let (successes, fallbacks) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let e = pair.sample_d(&mut stream.rng(i));
            let c = dist.classify(e.x, i);
            let ok = c.bit == (e.side == Side::U);
            (ok as u64, c.fallback.is_some() as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (ci_low, ci_high) = wilson_interval(successes, samples, confidence);
    AdvantageEstimate {
        success_prob: successes as f64 / samples as f64,
        ci_low,
        ci_high,
        samples,
        successes,
        failure_rate: fallbacks as f64 / samples as f64,
    }
}
