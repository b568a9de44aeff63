//! The interpolation game loop and its transcripts.

use rand::RngCore;
use serde::Serialize;

use crate::bits::BitString;
use crate::np_pair::PairError;

use super::student::{ProofToken, StepBudget, Student, StudentCtx};
use super::teacher::{Counterexample, Reply, Teacher};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Outcome {
    Accepted,
    Refuted {
        counterexample: Counterexample,
    },
    /// The teacher had nothing to say; the game stops without a winner.
    Silent,
    /// The student named an index outside `0..=m`.
    OutOfRange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub proposed: usize,
    pub outcome: Outcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StudentWins,
    StudentLoses,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub x: Vec<BitString>,
    pub rounds: Vec<RoundRecord>,
    pub verdict: Verdict,
    pub budget_exhausted: bool,
    pub teacher_silent: bool,
    pub steps: u64,
    /// Id of the coin stream the student drew from.
    pub coins: String,
}

impl Transcript {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript serialises")
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &Counterexample> {
        self.rounds.iter().filter_map(|r| match &r.outcome {
            Outcome::Refuted { counterexample } => Some(counterexample),
            _ => None,
        })
    }
}

/// Plays up to `student.rounds()` rounds on `a`. Each answer gets a fresh
/// step budget of `step_limit`.
pub fn run_game(
    student: &dyn Student,
    teacher: &dyn Teacher,
    token: &ProofToken,
    a: &[BitString],
    step_limit: u64,
    coins: &mut dyn RngCore,
    coins_id: &str,
) -> Result<Transcript, PairError> {
    let m = a.len();
    let mut rounds = Vec::new();
    let mut history: Vec<Counterexample> = Vec::new();
    let mut steps = 0;
    let mut verdict = Verdict::StudentLoses;
    let mut budget_exhausted = false;
    let mut teacher_silent = false;
    for round in 1..=student.rounds() {
        let mut budget = StepBudget::new(step_limit);
        let mut ctx = StudentCtx { budget: &mut budget, coins: &mut *coins };
        let answer = student.answer(round, a, token, &history, &mut ctx);
        steps += budget.used().min(step_limit);
        let Ok(proposed) = answer else {
            budget_exhausted = true;
            break;
        };
        if proposed > m {
            rounds.push(RoundRecord { proposed, outcome: Outcome::OutOfRange });
            break;
        }
        match teacher.respond(a, proposed)? {
            Reply::Accept => {
                rounds.push(RoundRecord { proposed, outcome: Outcome::Accepted });
                verdict = Verdict::StudentWins;
                break;
            }
            Reply::Refute(ce) => {
                history.push(ce.clone());
                rounds.push(RoundRecord { proposed, outcome: Outcome::Refuted { counterexample: ce } });
            }
            Reply::NoAnswer => {
                rounds.push(RoundRecord { proposed, outcome: Outcome::Silent });
                teacher_silent = true;
                break;
            }
        }
    }
    Ok(Transcript {
        x: a.to_vec(),
        rounds,
        verdict,
        budget_exhausted,
        teacher_silent,
        steps,
        coins: coins_id.to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::game::student::{ConstantStudent, OmniscientStudent, TwoRoundStudent, DEFAULT_STEP_BUDGET};
    use crate::game::teacher::HonestTeacher;
    use crate::np_pair::make_easy_pair;

    fn tuple(bits: &[&str]) -> Vec<BitString> {
        bits.iter().map(|b| BitString::from_bin(b).unwrap()).collect()
    }

    fn play(s: &dyn Student, a: &[BitString]) -> Transcript {
        let pair = Arc::new(make_easy_pair(3).unwrap());
        let token = ProofToken::new(&pair, a.len());
        let t = HonestTeacher::new(pair);
        let mut coins = ChaCha8Rng::seed_from_u64(1);
        run_game(s, &t, &token, a, DEFAULT_STEP_BUDGET, &mut coins, "test").unwrap()
    }

    #[test]
    fn constant_zero_loses_on_hybrid() {
        let t = play(&ConstantStudent::new(0, 1), &tuple(&["100", "000", "001"]));
        assert_eq!(t.verdict, Verdict::StudentLoses);
        assert_eq!(t.rounds.len(), 1);
        assert!(matches!(t.rounds[0].outcome, Outcome::Refuted { .. }));
    }

    #[test]
    fn two_round_student_recovers() {
        let pair = Arc::new(make_easy_pair(3).unwrap());
        let s = TwoRoundStudent::new(pair.clone(), 1);
        let a = tuple(&["100", "101", "110", "111", "000", "001"]);
        let t = play(&s, &a);
        assert_eq!(t.verdict, Verdict::StudentWins);
        assert_eq!(t.rounds.iter().map(|r| r.proposed).collect::<Vec<_>>(), vec![1, 4]);
        let s = OmniscientStudent::new(pair);
        assert_eq!(play(&s, &a).rounds.len(), 1);
    }

    #[test]
    fn out_of_range_loses() {
        let t = play(&ConstantStudent::new(9, 2), &tuple(&["100", "000"]));
        assert_eq!(t.verdict, Verdict::StudentLoses);
        assert_eq!(t.rounds[0].outcome, Outcome::OutOfRange);
    }

    #[test]
    fn transcript_json_uses_hex() {
        let t = play(&ConstantStudent::new(0, 1), &tuple(&["100", "000", "001"]));
        let line = t.to_json_line();
        assert!(line.contains("\"x\":[\"4\",\"0\",\"1\"]"), "{line}");
        assert!(line.contains("\"verdict\":\"student_loses\""));
    }
}
