//! Hybrid universes `W_i[m] = U^i × V^(m-i)` with some positions pinned.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::bits::{BitString, Side};
use crate::game::WitnessMap;
use crate::np_pair::{Member, NpPair, PairError};

/// Positions `lo..=hi` are active; everything else is fixed. A fixed position
/// below `lo` holds a U-element, above `hi` a V-element. The active chain
/// always starts in `U` and ends in `V`, so its boundaries are `lo..hi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HybridUniverse {
    pub m: usize,
    pub lo: usize,
    pub hi: usize,
    pub fixed: BTreeMap<usize, Member>,
}

impl HybridUniverse {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "a hybrid chain needs at least two positions");
        Self { m, lo: 1, hi: m, fixed: BTreeMap::new() }
    }

    /// Boundary indices with nonempty hybrids: `W_i` for `i` in `lo..hi`.
    pub fn boundaries(&self) -> std::ops::Range<usize> {
        self.lo..self.hi
    }

    pub fn active_len(&self) -> usize {
        self.hi - self.lo + 1
    }

    /// Side of `pos` in `W_i`.
    pub fn side_at(&self, i: usize, pos: usize) -> Side {
        if pos <= i {
            Side::U
        } else {
            Side::V
        }
    }

    /// Pins `members` to consecutive positions starting at `start` and shrinks
    /// the active range to what is left.
    pub fn fix(&self, start: usize, members: &[Member]) -> Self {
        let end = start + members.len() - 1;
        assert!(start >= self.lo && end <= self.hi, "block outside the active range");
        assert!(start == self.lo || end == self.hi, "block must be a prefix or suffix");
        let mut out = self.clone();
        for (j, mem) in members.iter().enumerate() {
            out.fixed.insert(start + j, *mem);
        }
        if start == self.lo {
            out.lo = end + 1;
        } else {
            out.hi = start - 1;
        }
        out
    }

    /// One draw from `W_i` restricted to this universe, with every witness.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        pair: &NpPair,
        i: usize,
        rng: &mut R,
    ) -> Result<(Vec<BitString>, WitnessMap), PairError> {
        debug_assert!(self.boundaries().contains(&i));
        let mut a = Vec::with_capacity(self.m);
        let mut known = WitnessMap::new();
        for pos in 1..=self.m {
            let mem = match self.fixed.get(&pos) {
                Some(mem) => *mem,
                None => pair.sample_member(self.side_at(i, pos), rng)?,
            };
            a.push(mem.x);
            known.insert(pos, mem);
        }
        Ok((a, known))
    }

    /// Draws the boundary uniformly from the active range, then the tuple.
    pub fn sample_mixture<R: Rng + ?Sized>(
        &self,
        pair: &NpPair,
        rng: &mut R,
    ) -> Result<(usize, Vec<BitString>, WitnessMap), PairError> {
        let i = rng.gen_range(self.boundaries());
        let (a, known) = self.sample(pair, i, rng)?;
        Ok((i, a, known))
    }
}

/// `W_i[m]` sample with nothing fixed.
pub fn sample_hybrid<R: Rng + ?Sized>(
    pair: &NpPair,
    m: usize,
    i: usize,
    rng: &mut R,
) -> Result<(Vec<BitString>, WitnessMap), PairError> {
    HybridUniverse::new(m).sample(pair, i, rng)
}
