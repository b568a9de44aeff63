//! Replaying a recorded answer path against the advice teacher.

use rand::RngCore;

use crate::bits::BitString;
use crate::game::{AdviceTeacher, Counterexample, ProofToken, Reply, StepBudget, Student, StudentCtx, WitnessMap};

/// What the reduction needs to drive one student round.
#[derive(Clone, Copy)]
pub struct RoundCtx<'a> {
    pub student: &'a dyn Student,
    pub token: &'a ProofToken,
    /// 1-based round whose answer is wanted.
    pub round: usize,
    /// Recorded answers for rounds `1..round`.
    pub path: &'a [usize],
    pub step_limit: u64,
    pub witness_len: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Replay {
    Answer(usize),
    /// An earlier round answered off the recorded path.
    Deviated,
    /// The advice held nothing to refute a recorded answer.
    Silent,
    Budget,
}

/// Runs rounds `1..=ctx.round`, checking each earlier answer against the path
/// and refuting it from `known`. Returns the answer of the last round.
pub fn replay(ctx: &RoundCtx<'_>, a: &[BitString], known: &WitnessMap, coins: &mut dyn RngCore) -> Replay {
    debug_assert_eq!(ctx.path.len() + 1, ctx.round);
    let teacher = AdviceTeacher { known, witness_len: ctx.witness_len };
    let mut history: Vec<Counterexample> = Vec::with_capacity(ctx.path.len());
    for round in 1..=ctx.round {
        let mut budget = StepBudget::new(ctx.step_limit);
        let mut sctx = StudentCtx { budget: &mut budget, coins: &mut *coins };
        let Ok(answer) = ctx.student.answer(round, a, ctx.token, &history, &mut sctx) else {
            return Replay::Budget;
        };
        if round == ctx.round {
            return Replay::Answer(answer);
        }
        if answer != ctx.path[round - 1] {
            return Replay::Deviated;
        }
        match teacher.answer(a, answer) {
            Reply::Refute(ce) => history.push(ce),
            Reply::Accept | Reply::NoAnswer => return Replay::Silent,
        }
    }
    unreachable!("round >= 1")
}
