//! Disjoint NP pairs at desk scale.
//!
//! A pair is two verifiers `U(x, w)` and `V(x, w)` over strings of length
//! `n`, plus a sampler for the distribution `D_n` on `U_n ∪ V_n`. The sampler
//! is written as a deterministic *emission* function applied to a uniformly
//! drawn seed index, so the whole distribution can be enumerated exactly for
//! small `n`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::{BitString, Side, Witness};

pub const MIN_N: u8 = 3;
pub const MAX_N: u8 = 20;
/// Largest witness length `find_witness` will enumerate.
pub const WITNESS_BUDGET_BITS: u8 = 24;
/// Largest `n` for exact enumeration of side lists and `D_n`.
pub const EXHAUSTIVE_MAX_N: u8 = 12;
/// Rejection-sampling guard for `sample_side`.
pub const MAX_REJECTIONS: u32 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairError {
    #[error("n = {0} is outside the supported range [{MIN_N}, {MAX_N}]")]
    NOutOfRange(u8),
    #[error("hard bit index {index} is not below n = {n}")]
    HardBitOutOfRange { index: u8, n: u8 },
    #[error("permutation table is not a bijection on {{0,1}}^{0}")]
    NotBijection(u8),
    #[error("witness length {0} exceeds the enumeration budget of {WITNESS_BUDGET_BITS} bits")]
    WitnessBudget(u8),
    #[error("side {0} looks empty: {MAX_REJECTIONS} consecutive rejections")]
    EmptySide(Side),
    #[error("exhaustive enumeration needs n <= {EXHAUSTIVE_MAX_N}, got {0}")]
    TooLargeForEnumeration(u8),
    #[error("string has length {got}, pair expects {want}")]
    LengthMismatch { got: usize, want: usize },
}

/// Configuration of the one-way-permutation pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermPairConfig {
    pub n: u8,
    pub perm_seed: u64,
    pub hard_bit_index: u8,
}

impl PermPairConfig {
    pub fn new(n: u8, perm_seed: u64) -> Self {
        Self { n, perm_seed, hard_bit_index: 0 }
    }
}

#[derive(Clone, Debug)]
enum PairKind {
    /// `U` = images of seeds whose hard bit is 1, `V` = hard bit 0.
    Perm { table: Vec<u32>, inverse: Vec<u32>, hard_bit: u8 },
    /// `U` = msb 1, `V` = msb 0, the witness is the string itself.
    Easy,
    /// Deliberately broken control: `U` = msb 1, `V` = msb 0 or lsb 0.
    Overlap,
}

/// One draw from `D_n`: the string, the side it was tagged with, and the
/// witness that put it there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Emission {
    pub x: BitString,
    pub side: Side,
    pub witness: Witness,
}

/// A string together with the side it belongs to and a witness for it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Member {
    pub x: BitString,
    pub side: Side,
    pub witness: Witness,
}

/// Which verifiers accept `x` for some witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Membership {
    pub in_u: bool,
    pub in_v: bool,
}

impl Membership {
    pub fn contains(&self, side: Side) -> bool {
        match side {
            Side::U => self.in_u,
            Side::V => self.in_v,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NpPair {
    n: u8,
    witness_len: u8,
    pair_id: String,
    kind: PairKind,
}

fn check_n(n: u8) -> Result<(), PairError> {
    if (MIN_N..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(PairError::NOutOfRange(n))
    }
}

/// Fisher–Yates shuffle of the identity on `{0,1}^n`, driven by `perm_seed`.
pub fn permutation_table(n: u8, perm_seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
    let mut table: Vec<u32> = (0..1u32 << n).collect();
    for i in (1..table.len()).rev() {
        let j = rng.gen_range(0..=i);
        table.swap(i, j);
    }
    table
}

pub fn make_perm_pair(cfg: &PermPairConfig) -> Result<NpPair, PairError> {
    check_n(cfg.n)?;
    let table = permutation_table(cfg.n, cfg.perm_seed);
    let mut pair = NpPair::perm_from_table(cfg.n, table, cfg.hard_bit_index)?;
    pair.pair_id = format!("perm-n{}-s{}-h{}", cfg.n, cfg.perm_seed, cfg.hard_bit_index);
    Ok(pair)
}

pub fn make_easy_pair(n: u8) -> Result<NpPair, PairError> {
    check_n(n)?;
    Ok(NpPair { n, witness_len: n, pair_id: format!("easy-n{n}"), kind: PairKind::Easy })
}

/// A pair whose sides intersect; exists only as a negative control.
pub fn make_overlap_pair(n: u8) -> Result<NpPair, PairError> {
    check_n(n)?;
    Ok(NpPair { n, witness_len: n, pair_id: format!("overlap-n{n}"), kind: PairKind::Overlap })
}

impl NpPair {
    /// Permutation pair over an explicit table, e.g. the identity.
    pub fn perm_from_table(n: u8, table: Vec<u32>, hard_bit: u8) -> Result<NpPair, PairError> {
        check_n(n)?;
        if hard_bit >= n {
            return Err(PairError::HardBitOutOfRange { index: hard_bit, n });
        }
        let size = 1usize << n;
        if table.len() != size {
            return Err(PairError::NotBijection(n));
        }
        let mut inverse = vec![u32::MAX; size];
        for (s, &x) in table.iter().enumerate() {
            if x as usize >= size || inverse[x as usize] != u32::MAX {
                return Err(PairError::NotBijection(n));
            }
            inverse[x as usize] = s as u32;
        }
        Ok(NpPair {
            n,
            witness_len: n,
            pair_id: format!("perm-n{n}-table-h{hard_bit}"),
            kind: PairKind::Perm { table, inverse, hard_bit },
        })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn witness_len(&self) -> u8 {
        self.witness_len
    }

    pub fn pair_id(&self) -> &str {
        &self.pair_id
    }

    /// `π(s)` for permutation pairs; `None` for formula-defined pairs.
    pub fn permutation(&self) -> Option<&[u32]> {
        match &self.kind {
            PairKind::Perm { table, .. } => Some(table),
            _ => None,
        }
    }

    pub fn hard_bit(&self) -> Option<u8> {
        match &self.kind {
            PairKind::Perm { hard_bit, .. } => Some(*hard_bit),
            _ => None,
        }
    }

    pub fn is_easy(&self) -> bool {
        matches!(self.kind, PairKind::Easy)
    }

    pub fn is_overlap(&self) -> bool {
        matches!(self.kind, PairKind::Overlap)
    }

    pub fn verify(&self, side: Side, x: BitString, w: Witness) -> bool {
        if x.len() != self.n as usize || w.0.len() != self.witness_len as usize {
            return false;
        }
        match (&self.kind, side) {
            (PairKind::Perm { table, hard_bit, .. }, side) => {
                let s = w.0;
                table[s.value() as usize] == x.value() && s.bit(*hard_bit as usize) == (side == Side::U)
            }
            (PairKind::Easy, Side::U) => w.0 == x && x.msb(),
            (PairKind::Easy, Side::V) => w.0 == x && !x.msb(),
            (PairKind::Overlap, Side::U) => w.0 == x && x.msb(),
            (PairKind::Overlap, Side::V) => w.0 == x && (!x.msb() || !x.bit(0)),
        }
    }

    pub fn verify_u(&self, x: BitString, w: Witness) -> bool {
        self.verify(Side::U, x, w)
    }

    pub fn verify_v(&self, x: BitString, w: Witness) -> bool {
        self.verify(Side::V, x, w)
    }

    /// The sampler's deterministic core: seed index `s` in `[0, 2^n)` to a tagged string.
    pub fn emit(&self, s: u32) -> Emission {
        let seed = BitString::from_raw(s, self.n);
        match &self.kind {
            PairKind::Perm { table, hard_bit, .. } => Emission {
                x: BitString::from_raw(table[s as usize], self.n),
                side: if seed.bit(*hard_bit as usize) { Side::U } else { Side::V },
                witness: Witness(seed),
            },
            PairKind::Easy | PairKind::Overlap => {
                Emission { x: seed, side: if seed.msb() { Side::U } else { Side::V }, witness: Witness(seed) }
            }
        }
    }

    /// One draw from `D_n`.
    pub fn sample_d<R: Rng + ?Sized>(&self, rng: &mut R) -> Emission {
        self.emit(rng.gen_range(0..1u32 << self.n))
    }

    /// Every emission of the sampler, one per seed index; each has probability `2^-n`.
    pub fn enumerate_d(&self) -> Result<Vec<Emission>, PairError> {
        if self.n > EXHAUSTIVE_MAX_N {
            return Err(PairError::TooLargeForEnumeration(self.n));
        }
        Ok((0..1u32 << self.n).map(|s| self.emit(s)).collect())
    }

    /// `D_n` conditioned on `side`, by rejection from `sample_d`.
    pub fn sample_side<R: Rng + ?Sized>(&self, side: Side, rng: &mut R) -> Result<(BitString, Witness), PairError> {
        for _ in 0..MAX_REJECTIONS {
            let e = self.sample_d(rng);
            if e.side == side {
                return Ok((e.x, e.witness));
            }
        }
        Err(PairError::EmptySide(side))
    }

    /// [`NpPair::sample_side`] packaged as a [`Member`].
    pub fn sample_member<R: Rng + ?Sized>(&self, side: Side, rng: &mut R) -> Result<Member, PairError> {
        let (x, witness) = self.sample_side(side, rng)?;
        Ok(Member { x, side, witness })
    }

    /// Lexicographically smallest witness for `x` on `side`, by scanning every
    /// candidate of the pair's witness length.
    pub fn find_witness(&self, x: BitString, side: Side) -> Result<Option<Witness>, PairError> {
        if self.witness_len > WITNESS_BUDGET_BITS {
            return Err(PairError::WitnessBudget(self.witness_len));
        }
        if x.len() != self.n as usize {
            return Err(PairError::LengthMismatch { got: x.len(), want: self.n as usize });
        }
        Ok(BitString::all(self.witness_len).map(Witness).find(|&w| self.verify(side, x, w)))
    }

    /// Membership by direct inversion rather than enumeration. Agrees with
    /// `find_witness` (checked exhaustively in tests); students use it and are
    /// charged the enumeration cost through their step budget.
    pub fn membership(&self, x: BitString) -> Membership {
        match &self.kind {
            PairKind::Perm { inverse, hard_bit, .. } => {
                let s = inverse[x.value() as usize];
                let in_u = (s >> hard_bit) & 1 == 1;
                Membership { in_u, in_v: !in_u }
            }
            PairKind::Easy => Membership { in_u: x.msb(), in_v: !x.msb() },
            PairKind::Overlap => Membership { in_u: x.msb(), in_v: !x.msb() || !x.bit(0) },
        }
    }

    /// Same witness `find_witness` returns, without the scan.
    pub fn witness_fast(&self, x: BitString, side: Side) -> Option<Witness> {
        if !self.membership(x).contains(side) {
            return None;
        }
        match &self.kind {
            PairKind::Perm { inverse, .. } => Some(Witness(BitString::from_raw(inverse[x.value() as usize], self.n))),
            PairKind::Easy | PairKind::Overlap => Some(Witness(x)),
        }
    }

    /// Exact `(U_n, V_n)` via `find_witness` on every string, sorted.
    pub fn side_lists(&self) -> Result<(Vec<BitString>, Vec<BitString>), PairError> {
        if self.n > EXHAUSTIVE_MAX_N {
            return Err(PairError::TooLargeForEnumeration(self.n));
        }
        let mut u = Vec::new();
        let mut v = Vec::new();
        for x in BitString::all(self.n) {
            if self.find_witness(x, Side::U)?.is_some() {
                u.push(x);
            }
            if self.find_witness(x, Side::V)?.is_some() {
                v.push(x);
            }
        }
        Ok((u, v))
    }

    /// Exact support of `D_n | side` with witnesses and probabilities.
    pub fn side_distribution(&self, side: Side) -> Result<Vec<(BitString, Witness, f64)>, PairError> {
        let emissions = self.enumerate_d()?;
        let hits: Vec<_> = emissions.into_iter().filter(|e| e.side == side).collect();
        if hits.is_empty() {
            return Err(PairError::EmptySide(side));
        }
        let p = 1.0 / hits.len() as f64;
        Ok(hits.into_iter().map(|e| (e.x, e.witness, p)).collect())
    }
}

/// Sorted hex lines, one string per line.
pub fn side_list_text(list: &[BitString]) -> String {
    let sorted: BTreeSet<_> = list.iter().copied().collect();
    let mut out = String::new();
    for x in sorted {
        out.push_str(&x.to_hex());
        out.push('\n');
    }
    out
}
