//! Teachers: the unbounded honest one and the advice-backed one.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::bits::{BitString, Side, Witness};
use crate::encoding::disjunct_blocks;
use crate::np_pair::{Member, NpPair, PairError};

/// A witness assignment falsifying one disjunct under the game's x-tuple.
///
/// `witnesses` has one entry per negated verifier block of the disjunct, in
/// block order; aux variables are implied by canonical completion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Counterexample {
    pub disjunct: usize,
    pub witnesses: Vec<Witness>,
    /// The block whose verifier the assignment satisfies.
    pub via: (Side, usize),
}

impl Counterexample {
    /// Checks against the verifiers that the assignment really falsifies the
    /// disjunct: some block's verifier accepts its witness.
    pub fn falsifies(&self, pair: &NpPair, a: &[BitString]) -> bool {
        let blocks = disjunct_blocks(self.disjunct, a.len());
        blocks.len() == self.witnesses.len()
            && blocks.iter().zip(&self.witnesses).any(|(&(side, pos), &w)| pair.verify(side, a[pos - 1], w))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reply {
    Accept,
    Refute(Counterexample),
    /// The teacher holds nothing that refutes the proposal.
    NoAnswer,
}

pub trait Teacher {
    fn respond(&self, a: &[BitString], proposed: usize) -> Result<Reply, PairError>;
}

/// Unbounded teacher: finds witnesses by enumeration and returns the
/// lexicographically smallest falsifying assignment.
pub struct HonestTeacher {
    pair: Arc<NpPair>,
}

impl HonestTeacher {
    pub fn new(pair: Arc<NpPair>) -> Self {
        Self { pair }
    }
}

impl Teacher for HonestTeacher {
    fn respond(&self, a: &[BitString], proposed: usize) -> Result<Reply, PairError> {
        let blocks = disjunct_blocks(proposed, a.len());
        let zero = Witness(BitString::zeros(self.pair.witness_len()));
        // The falsifying set is the union over blocks j of
        // {w_j valid, others free}; its least element sets block j to the
        // least valid witness and everything else to zero, for some j.
        let mut best: Option<Counterexample> = None;
        for (j, &(side, pos)) in blocks.iter().enumerate() {
            if let Some(w) = self.pair.find_witness(a[pos - 1], side)? {
                let mut witnesses = vec![zero; blocks.len()];
                witnesses[j] = w;
                let cand = Counterexample { disjunct: proposed, witnesses, via: (side, pos) };
                if best.as_ref().is_none_or(|b| cand.witnesses < b.witnesses) {
                    best = Some(cand);
                }
            }
        }
        Ok(best.map_or(Reply::Accept, Reply::Refute))
    }
}

/// Known strings with witnesses, keyed by 1-based position.
pub type WitnessMap = BTreeMap<usize, Member>;

/// Answers only from stored witnesses and never enumerates. A stored member
/// is used only if it matches the string actually at that position.
pub struct AdviceTeacher<'a> {
    pub known: &'a WitnessMap,
    pub witness_len: u8,
}

impl AdviceTeacher<'_> {
    pub fn answer(&self, a: &[BitString], proposed: usize) -> Reply {
        let blocks = disjunct_blocks(proposed, a.len());
        let zero = Witness(BitString::zeros(self.witness_len));
        // U-blocks first: in a hybrid tuple at most one block is refutable.
        let order = blocks
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, b)| b.0 == Side::U)
            .chain(blocks.iter().enumerate().filter(|(_, b)| b.0 == Side::V));
        for (j, &(side, pos)) in order {
            if let Some(mem) = self.known.get(&pos) {
                if mem.side == side && mem.x == a[pos - 1] {
                    let mut witnesses = vec![zero; blocks.len()];
                    witnesses[j] = mem.witness;
                    return Reply::Refute(Counterexample { disjunct: proposed, witnesses, via: (side, pos) });
                }
            }
        }
        Reply::NoAnswer
    }
}

impl Teacher for AdviceTeacher<'_> {
    fn respond(&self, a: &[BitString], proposed: usize) -> Result<Reply, PairError> {
        Ok(self.answer(a, proposed))
    }
}
