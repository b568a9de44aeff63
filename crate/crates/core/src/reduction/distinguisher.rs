//! Advice-carrying classifiers produced by the reduction.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bits::{BitString, Side};
use crate::game::{ProofToken, Student, WitnessMap};
use crate::np_pair::Member;
use crate::seed::SeedStream;

use super::gap::Direction;
use super::replay::{replay, Replay, RoundCtx};

/// Places `x` at `pos` (1-based) among the `known` strings and replays.
/// The challenge's own witness is never available to the teacher.
pub(crate) fn embed_and_replay(
    ctx: &RoundCtx<'_>,
    m: usize,
    known: &WitnessMap,
    pos: usize,
    x: BitString,
    coins: &mut dyn RngCore,
) -> Replay {
    debug_assert!(!known.contains_key(&pos));
    let a: Vec<BitString> = (1..=m).map(|p| if p == pos { x } else { known[&p].x }).collect();
    replay(ctx, &a, known, coins)
}

/// Members pinned in one shrink round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdviceBlock {
    pub round: usize,
    pub start: usize,
    pub side: Side,
    pub members: Vec<Member>,
}

impl AdviceBlock {
    pub fn end(&self) -> usize {
        self.start + self.members.len() - 1
    }
}

/// The residual `W[3]` frame: anchors at `a` (U) and `a + 2` (V).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Frame {
    pub a: usize,
    pub lower: Member,
    pub upper: Member,
}

impl Frame {
    pub fn challenge_position(&self) -> usize {
        self.a + 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Advice {
    pub blocks: Vec<AdviceBlock>,
    /// Recorded answers `i_1, i_2, …` of the shrink rounds.
    pub path: Vec<usize>,
    pub frame: Option<Frame>,
}

impl Advice {
    /// Every pinned member by position, anchors included.
    pub fn known(&self) -> WitnessMap {
        let mut known = WitnessMap::new();
        for b in &self.blocks {
            for (j, mem) in b.members.iter().enumerate() {
                known.insert(b.start + j, *mem);
            }
        }
        if let Some(f) = &self.frame {
            known.insert(f.a, f.lower);
            known.insert(f.a + 2, f.upper);
        }
        known
    }

    /// Hash of all pinned strings and witnesses.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"kptlab/advice/1");
        for (pos, mem) in self.known() {
            h.update(format!("{pos}:{}:{}:{};", mem.side, mem.x.to_hex(), mem.witness.0.to_hex()).as_bytes());
        }
        for i in &self.path {
            h.update(format!("p{i};").as_bytes());
        }
        hex::encode(&h.finalize()[..16])
    }
}

/// Everything the classifier needs to rerun the student.
#[derive(Clone)]
pub struct StudentHandle {
    pub student: Arc<dyn Student>,
    pub token: ProofToken,
    pub m: usize,
    pub step_limit: u64,
    pub witness_len: u8,
    /// Coins for randomised students at classification time.
    pub coins: SeedStream,
}

impl fmt::Debug for StudentHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StudentHandle").field("student", &self.student.name()).field("m", &self.m).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DistinguisherKind {
    /// Embed at `t + 1` inside a fixed context and test the round-`round`
    /// answer against `answer`.
    Gap {
        round: usize,
        t: usize,
        answer: usize,
        direction: Direction,
        /// Context strings, position `t + 1` excluded.
        #[serde(skip)]
        context: WitnessMap,
        estimated_gap: f64,
    },
    /// Replay the full game on the residual frame.
    Endgame { rounds: usize },
    /// Always a fair coin.
    Coin { reason: String },
    /// Outputs one bit of the challenge; a reference classifier.
    ReadBit { index: usize },
}

/// Why a classification fell back to the coin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    Degenerate,
    Deviated,
    Silent,
    Budget,
    OffFrame,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    /// `true` claims `U`.
    pub bit: bool,
    pub fallback: Option<Fallback>,
}

#[derive(Clone, Debug)]
pub struct Distinguisher {
    pub kind: DistinguisherKind,
    pub advice: Advice,
    pub student: Option<StudentHandle>,
    pub fallback: SeedStream,
}

impl Distinguisher {
    pub fn coin(reason: impl Into<String>, fallback: SeedStream) -> Self {
        Self {
            kind: DistinguisherKind::Coin { reason: reason.into() },
            advice: Advice::default(),
            student: None,
            fallback,
        }
    }

    pub fn read_bit(index: usize, fallback: SeedStream) -> Self {
        Self { kind: DistinguisherKind::ReadBit { index }, advice: Advice::default(), student: None, fallback }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, DistinguisherKind::Coin { .. })
    }

    fn coin_flip(&self, call: u64, why: Fallback) -> Classification {
        Classification { bit: self.fallback.rng(call).gen(), fallback: Some(why) }
    }

    /// Classifies `x`. `call` indexes the coin streams so that repeated
    /// evaluation is reproducible.
    pub fn classify(&self, x: BitString, call: u64) -> Classification {
        match &self.kind {
            DistinguisherKind::Coin { .. } => self.coin_flip(call, Fallback::Degenerate),
            DistinguisherKind::ReadBit { index } => Classification { bit: x.bit(*index), fallback: None },
            DistinguisherKind::Gap { round, t, answer, direction, context, .. } => {
                let h = self.student.as_ref().expect("gap distinguisher carries a student");
                let ctx = self.round_ctx(h, *round);
                let hit =
                    embed_and_replay(&ctx, h.m, context, t + 1, x, &mut h.coins.rng(call)) == Replay::Answer(*answer);
                let bit = match direction {
                    Direction::Increase => hit,
                    Direction::Decrease => !hit,
                };
                Classification { bit, fallback: None }
            }
            DistinguisherKind::Endgame { rounds } => {
                let h = self.student.as_ref().expect("endgame distinguisher carries a student");
                let frame = self.advice.frame.as_ref().expect("endgame distinguisher carries a frame");
                let known = self.advice.known();
                let ctx = self.round_ctx(h, *rounds);
                match embed_and_replay(&ctx, h.m, &known, frame.challenge_position(), x, &mut h.coins.rng(call)) {
                    Replay::Answer(i) if i == frame.a => Classification { bit: false, fallback: None },
                    Replay::Answer(i) if i == frame.a + 1 => Classification { bit: true, fallback: None },
                    Replay::Answer(_) => self.coin_flip(call, Fallback::OffFrame),
                    Replay::Deviated => self.coin_flip(call, Fallback::Deviated),
                    Replay::Silent => self.coin_flip(call, Fallback::Silent),
                    Replay::Budget => self.coin_flip(call, Fallback::Budget),
                }
            }
        }
    }

    fn round_ctx<'a>(&'a self, h: &'a StudentHandle, round: usize) -> RoundCtx<'a> {
        RoundCtx {
            student: h.student.as_ref(),
            token: &h.token,
            round,
            path: &self.advice.path[..round - 1],
            step_limit: h.step_limit,
            witness_len: h.witness_len,
        }
    }
}
