//! Per-hybrid answer frequencies of one student round.

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::Side;
use crate::game::WitnessMap;
use crate::np_pair::{NpPair, PairError};
use crate::seed::SeedStream;

use super::hybrid::HybridUniverse;
use super::replay::{replay, Replay, RoundCtx};

/// Largest tuple count the exact table will enumerate per hybrid.
pub const EXACT_TABLE_MAX_TUPLES: u64 = 1 << 20;

/// Counts indexed by (hybrid row, answer). Columns `0..=m` are answers,
/// then one column for budget exhaustion and one for leaving the path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub round: usize,
    pub m: usize,
    /// Boundary index `i` of each row.
    pub boundaries: Vec<usize>,
    pub counts: Vec<Vec<u64>>,
    /// Row totals; every row of a sampled table has the same total.
    pub totals: Vec<u64>,
    pub gamma: f64,
    pub i_star: usize,
}

impl FrequencyTable {
    pub fn budget_column(&self) -> usize {
        self.m + 1
    }

    pub fn off_path_column(&self) -> usize {
        self.m + 2
    }

    pub fn from_counts(round: usize, m: usize, boundaries: Vec<usize>, counts: Vec<Vec<u64>>) -> Self {
        let totals = counts.iter().map(|r| r.iter().sum()).collect();
        let mut t = Self { round, m, boundaries, counts, totals, gamma: 0.0, i_star: 0 };
        (t.gamma, t.i_star) = t.recompute_gamma();
        t
    }

    /// Mixture marginal maximised over answers, lowest index on ties.
    pub fn recompute_gamma(&self) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for ans in 0..=self.m {
            let g = self.marginal(ans);
            if g > best.0 {
                best = (g, ans);
            }
        }
        best
    }

    /// Frequency of `answer` under the uniform mixture of the rows.
    pub fn marginal(&self, answer: usize) -> f64 {
        let rows = self.boundaries.len() as f64;
        (0..self.boundaries.len()).map(|r| self.freq(r, answer)).sum::<f64>() / rows
    }

    pub fn freq(&self, row: usize, answer: usize) -> f64 {
        if self.totals[row] == 0 {
            0.0
        } else {
            self.counts[row][answer] as f64 / self.totals[row] as f64
        }
    }

    pub fn row_of(&self, boundary: usize) -> Option<usize> {
        self.boundaries.iter().position(|&b| b == boundary)
    }

    /// Frequency of `answer` on the hybrid with boundary `i`.
    pub fn freq_at(&self, boundary: usize, answer: usize) -> Option<f64> {
        self.row_of(boundary).map(|r| self.freq(r, answer))
    }
}

fn bucket(m: usize, r: Replay) -> usize {
    match r {
        Replay::Answer(i) if i <= m => i,
        Replay::Budget => m + 1,
        _ => m + 2,
    }
}

/// Runs the round on `a` with a fresh coin stream; the bucket it falls into.
fn evaluate(
    ctx: &RoundCtx<'_>,
    m: usize,
    a: &[crate::bits::BitString],
    known: &WitnessMap,
    coins: &mut dyn rand::RngCore,
) -> usize {
    bucket(m, replay(ctx, a, known, coins))
}

/// Sampled table: `samples` draws per active boundary, each from its own
/// stream index so the result does not depend on scheduling.
pub fn estimate_frequency_table(
    ctx: &RoundCtx<'_>,
    pair: &NpPair,
    universe: &HybridUniverse,
    samples: u64,
    stream: &SeedStream,
) -> Result<FrequencyTable, PairError> {
    assert!(samples >= 1);
    let m = universe.m;
    let boundaries: Vec<usize> = universe.boundaries().collect();
    let mut counts = Vec::with_capacity(boundaries.len());
    for &i in &boundaries {
        let row_stream = stream.child_n("row", i as u64);
        let row = (0..samples)
            .into_par_iter()
            .map(|s| -> Result<Vec<u64>, PairError> {
                let mut rng = row_stream.rng(s);
                let (a, known) = universe.sample(pair, i, &mut rng)?;
                let mut row = vec![0u64; m + 3];
                row[evaluate(ctx, m, &a, &known, &mut rng)] += 1;
                Ok(row)
            })
            .try_reduce(
                || vec![0u64; m + 3],
                |mut x, y| {
                    x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
                    Ok(x)
                },
            )?;
        counts.push(row);
    }
    Ok(FrequencyTable::from_counts(ctx.round, m, boundaries, counts))
}

/// Exact table by enumerating every tuple of every active hybrid; each tuple
/// has the same weight because every shipped `D_n | side` is uniform on its
/// support. Randomised students draw from `coins.rng(row)`
/// restarted for every tuple, so their table is exact only for that stream.
pub fn exact_frequency_table(
    ctx: &RoundCtx<'_>,
    pair: &NpPair,
    universe: &HybridUniverse,
    coins: &SeedStream,
) -> Result<FrequencyTable, PairError> {
    let m = universe.m;
    let (u_list, v_list) = (pair.side_distribution(Side::U)?, pair.side_distribution(Side::V)?);
    let member = |side: Side, j: usize| {
        let (x, witness, _) = match side {
            Side::U => u_list[j],
            Side::V => v_list[j],
        };
        crate::np_pair::Member { x, side, witness }
    };
    let boundaries: Vec<usize> = universe.boundaries().collect();
    let mut counts = Vec::with_capacity(boundaries.len());
    for &i in &boundaries {
        let active: Vec<(usize, Side)> = (universe.lo..=universe.hi).map(|p| (p, universe.side_at(i, p))).collect();
        let radices: Vec<usize> =
            active.iter().map(|&(_, s)| if s == Side::U { u_list.len() } else { v_list.len() }).collect();
        let total = radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r as u64));
        let total = match total {
            Some(t) if t <= EXACT_TABLE_MAX_TUPLES => t,
            _ => return Err(PairError::TooLargeForEnumeration(pair.n())),
        };
        let row = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut known = universe.fixed.clone();
                for (j, &(pos, side)) in active.iter().enumerate().rev() {
                    let r = radices[j] as u64;
                    known.insert(pos, member(side, (idx % r) as usize));
                    idx /= r;
                }
                let a: Vec<_> = (1..=m).map(|p| known[&p].x).collect();
                let mut rng = coins.rng(i as u64);
                let mut row = vec![0u64; m + 3];
                row[evaluate(ctx, m, &a, &known, &mut rng)] += 1;
                row
            })
            .reduce(
                || vec![0u64; m + 3],
                |mut x, y| {
                    x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
                    x
                },
            );
        counts.push(row);
    }
    Ok(FrequencyTable::from_counts(ctx.round, m, boundaries, counts))
}
