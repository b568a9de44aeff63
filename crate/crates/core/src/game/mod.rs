//! The Student–Teacher interpolation game.

pub mod engine;
pub mod student;
pub mod teacher;

pub use engine::{run_game, Outcome, RoundRecord, Transcript, Verdict};
pub use student::{
    boundary_by_inversion, BudgetExhausted, ConstantStudent, MsbStudent, OmniscientStudent, ParityAnswer,
    ParityStudent, ProofToken, RandomStudent, StepBudget, Student, StudentCtx, TwoRoundStudent, DEFAULT_STEP_BUDGET,
};
pub use teacher::{AdviceTeacher, Counterexample, HonestTeacher, Reply, Teacher, WitnessMap};
