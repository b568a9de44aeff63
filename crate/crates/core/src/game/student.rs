//! Student strategies: a round bound `k` and one answer function per round.

use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::encoding::disjunct_blocks;
use crate::np_pair::NpPair;

use super::teacher::Counterexample;

/// Steps a student may spend on one answer.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Opaque stand-in for the proof the student is handed: it names the
/// instance layout without carrying any proof.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ProofToken {
    pub pair_id: String,
    pub n: u8,
    pub m: usize,
    pub fingerprint: String,
}

impl ProofToken {
    pub fn new(pair: &NpPair, m: usize) -> Self {
        let mut h = Sha256::new();
        h.update(b"kptlab/layout/1");
        h.update(pair.pair_id().as_bytes());
        h.update([pair.n(), pair.witness_len()]);
        h.update((m as u64).to_le_bytes());
        for d in 0..=m {
            for (side, pos) in disjunct_blocks(d, m) {
                h.update(format!("{d}:{side}@{pos};").as_bytes());
            }
        }
        let digest = h.finalize();
        Self { pair_id: pair.pair_id().to_owned(), n: pair.n(), m, fingerprint: hex::encode(&digest[..16]) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExhausted;

/// Step counter standing in for a polynomial running-time bound.
#[derive(Clone, Debug)]
pub struct StepBudget {
    used: u64,
    limit: u64,
}

impl StepBudget {
    pub fn new(limit: u64) -> Self {
        Self { used: 0, limit }
    }

    pub fn charge(&mut self, steps: u64) -> Result<(), BudgetExhausted> {
        self.used = self.used.saturating_add(steps);
        if self.used > self.limit {
            Err(BudgetExhausted)
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

impl Default for StepBudget {
    fn default() -> Self {
        Self::new(DEFAULT_STEP_BUDGET)
    }
}

/// Per-answer resources: the step budget and the seeded coin stream that
/// randomised students must draw from.
pub struct StudentCtx<'a> {
    pub budget: &'a mut StepBudget,
    pub coins: &'a mut dyn RngCore,
}

/// A student: `k` answer functions `f_1 … f_k`. Round `j` (1-based) sees the
/// x-tuple, the proof token, and the counterexamples to rounds `1..j`.
pub trait Student: Send + Sync {
    fn name(&self) -> String;

    fn rounds(&self) -> usize;

    fn answer(
        &self,
        round: usize,
        a: &[BitString],
        token: &ProofToken,
        history: &[Counterexample],
        ctx: &mut StudentCtx<'_>,
    ) -> Result<usize, BudgetExhausted>;
}

/// Index of the first disjunct that is valid for `a`, deciding membership by
/// brute-force inversion; each lookup is charged `2^witness_len` steps.
pub fn boundary_by_inversion(
    pair: &NpPair,
    a: &[BitString],
    budget: &mut StepBudget,
) -> Result<usize, BudgetExhausted> {
    let cost = 1u64 << pair.witness_len();
    first_valid_disjunct(a, |x| {
        budget.charge(cost)?;
        let mm = pair.membership(x);
        Ok((mm.in_u, mm.in_v))
    })
}

/// Shared boundary walk over a membership oracle returning `(in_u, in_v)`.
fn first_valid_disjunct(
    a: &[BitString],
    mut member: impl FnMut(BitString) -> Result<(bool, bool), BudgetExhausted>,
) -> Result<usize, BudgetExhausted> {
    let m = a.len();
    if !member(a[0])?.0 {
        return Ok(0);
    }
    for i in 1..m {
        let (_, in_v) = member(a[i - 1])?;
        let (next_u, _) = member(a[i])?;
        if !in_v && !next_u {
            return Ok(i);
        }
    }
    Ok(m)
}

/// Brute-force interpolator: one round, always the true boundary.
pub struct OmniscientStudent {
    pair: Arc<NpPair>,
}

impl OmniscientStudent {
    pub fn new(pair: Arc<NpPair>) -> Self {
        Self { pair }
    }
}

impl Student for OmniscientStudent {
    fn name(&self) -> String {
        "omniscient".into()
    }

    fn rounds(&self) -> usize {
        1
    }

    fn answer(
        &self,
        _round: usize,
        a: &[BitString],
        _token: &ProofToken,
        _history: &[Counterexample],
        ctx: &mut StudentCtx<'_>,
    ) -> Result<usize, BudgetExhausted> {
        boundary_by_inversion(&self.pair, a, ctx.budget)
    }
}

/// Always proposes the same index.
pub struct ConstantStudent {
    pub value: usize,
    pub k: usize,
}

impl ConstantStudent {
    pub fn new(value: usize, k: usize) -> Self {
        assert!(k >= 1);
        Self { value, k }
    }
}

impl Student for ConstantStudent {
    fn name(&self) -> String {
        format!("constant({})", self.value)
    }

    fn rounds(&self) -> usize {
        self.k
    }

    fn answer(
        &self,
        _round: usize,
        _a: &[BitString],
        _token: &ProofToken,
        _history: &[Counterexample],
        ctx: &mut StudentCtx<'_>,
    ) -> Result<usize, BudgetExhausted> {
        ctx.budget.charge(1)?;
        Ok(self.value)
    }
}

/// Uniform proposal in `0..=m` from the coin stream, every round.
pub struct RandomStudent {
    pub k: usize,
}

impl Student for RandomStudent {
    fn name(&self) -> String {
        "random".into()
    }

    fn rounds(&self) -> usize {
        self.k
    }

    fn answer(
        &self,
        _round: usize,
        a: &[BitString],
        _token: &ProofToken,
        _history: &[Counterexample],
        ctx: &mut StudentCtx<'_>,
    ) -> Result<usize, BudgetExhausted> {
        ctx.budget.charge(1)?;
        Ok(ctx.coins.gen_range(0..=a.len()))
    }
}

/// Round 1 proposes a fixed probe; round 2 the true boundary.
pub struct TwoRoundStudent {
    pair: Arc<NpPair>,
    pub probe: usize,
}

impl TwoRoundStudent {
    pub fn new(pair: Arc<NpPair>, probe: usize) -> Self {
        Self { pair, probe }
    }
}

impl Student for TwoRoundStudent {
    fn name(&self) -> String {
        format!("two_round(probe={})", self.probe)
    }

    fn rounds(&self) -> usize {
        2
    }

    fn answer(
        &self,
        round: usize,
        a: &[BitString],
        _token: &ProofToken,
        _history: &[Counterexample],
        ctx: &mut StudentCtx<'_>,
    ) -> Result<usize, BudgetExhausted> {
        if round == 1 {
            ctx.budget.charge(1)?;
            Ok(self.probe)
        } else {
            boundary_by_inversion(&self.pair, a, ctx.budget)
        }
    }
}

/// Reads membership straight off the most significant bit. Exact for the
/// easy pair, where membership is syntactic.
pub struct MsbStudent;

impl Student for MsbStudent {
    fn name(&self) -> String {
        "msb".into()
    }

    fn rounds(&self) -> usize {
        1
    }

    fn answer(
        &self,
        _round: usize,
        a: &[BitString],
        _token: &ProofToken,
        _history: &[Counterexample],
        ctx: &mut StudentCtx<'_>,
    ) -> Result<usize, BudgetExhausted> {
        first_valid_disjunct(a, |x| {
            ctx.budget.charge(1)?;
            Ok((x.msb(), !x.msb()))
        })
    }
}

/// What [`ParityStudent`] says in one parity case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ParityAnswer {
    Index(usize),
    Boundary,
}

/// Adversarial student whose answer depends on the parity of `x_1`.
pub struct ParityStudent {
    pair: Arc<NpPair>,
    pub even: ParityAnswer,
    pub odd: ParityAnswer,
    pub k: usize,
}

impl ParityStudent {
    pub fn new(pair: Arc<NpPair>, even: ParityAnswer, odd: ParityAnswer, k: usize) -> Self {
        assert!(k >= 1);
        Self { pair, even, odd, k }
    }
}

impl Student for ParityStudent {
    fn name(&self) -> String {
        format!("parity(even={:?}, odd={:?})", self.even, self.odd)
    }

    fn rounds(&self) -> usize {
        self.k
    }

    fn answer(
        &self,
        _round: usize,
        a: &[BitString],
        _token: &ProofToken,
        _history: &[Counterexample],
        ctx: &mut StudentCtx<'_>,
    ) -> Result<usize, BudgetExhausted> {
        ctx.budget.charge(a[0].len() as u64)?;
        match if a[0].parity() { self.odd } else { self.even } {
            ParityAnswer::Index(i) => Ok(i),
            ParityAnswer::Boundary => boundary_by_inversion(&self.pair, a, ctx.budget),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::np_pair::make_easy_pair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ask(s: &dyn Student, round: usize, a: &[BitString], pair: &NpPair) -> usize {
        let token = ProofToken::new(pair, a.len());
        let mut budget = StepBudget::default();
        let mut coins = ChaCha8Rng::seed_from_u64(0);
        let mut ctx = StudentCtx { budget: &mut budget, coins: &mut coins };
        s.answer(round, a, &token, &[], &mut ctx).unwrap()
    }

    fn tuple(bits: &[&str]) -> Vec<BitString> {
        bits.iter().map(|b| BitString::from_bin(b).unwrap()).collect()
    }

    #[test]
    fn omniscient_finds_boundary_and_edges() {
        let pair = Arc::new(make_easy_pair(3).unwrap());
        let s = OmniscientStudent::new(pair.clone());
        // W_2[5]: U U V V V
        assert_eq!(ask(&s, 1, &tuple(&["100", "111", "000", "011", "001"]), &pair), 2);
        assert_eq!(ask(&s, 1, &tuple(&["000", "001", "010"]), &pair), 0);
        assert_eq!(ask(&s, 1, &tuple(&["100", "101", "110"]), &pair), 3);
    }

    #[test]
    fn budget_is_enforced() {
        let mut b = StepBudget::new(10);
        assert!(b.charge(10).is_ok());
        assert_eq!(b.charge(1), Err(BudgetExhausted));
    }

    #[test]
    fn token_is_stable() {
        let pair = make_easy_pair(4).unwrap();
        assert_eq!(ProofToken::new(&pair, 6), ProofToken::new(&pair, 6));
        assert_ne!(ProofToken::new(&pair, 6).fingerprint, ProofToken::new(&pair, 3).fingerprint);
    }
}
