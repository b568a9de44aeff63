//! From a student to a distinguisher: gap extraction, advice fixing and the
//! binary search down to a residual `W[3]`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::Side;
use crate::game::{ProofToken, Student, DEFAULT_STEP_BUDGET};
use crate::np_pair::{Member, NpPair, PairError};
use crate::seed::SeedStream;
use crate::stats::{hoeffding_radius, hoeffding_samples};

use super::distinguisher::{
    embed_and_replay, Advice, AdviceBlock, Distinguisher, DistinguisherKind, Frame, StudentHandle,
};
use super::frequency::{estimate_frequency_table, FrequencyTable};
use super::gap::{default_tau, find_adjacent_gap, Direction, Gap};
use super::hybrid::HybridUniverse;
use super::replay::{replay, Replay, RoundCtx};

/// Failure probability behind every Hoeffding radius the reduction uses.
pub const DELTA: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("the reduction needs m = 3·2^(k-1) = {expected} for k = {k}, got m = {m}")]
    ChainShape { k: usize, m: usize, expected: usize },
    #[error("student plays {student} rounds but the reduction was asked for k = {k}")]
    RoundMismatch { k: usize, student: usize },
    #[error("parameter {0} must be positive")]
    NonPositive(&'static str),
    #[error(transparent)]
    Pair(#[from] PairError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReduceParams {
    pub k: usize,
    pub m: usize,
    /// Samples per hybrid row of a frequency table, and per advice candidate.
    pub samples: u64,
    pub tau: f64,
    /// Candidate blocks tried per shrink round.
    pub advice_budget: usize,
    /// Candidate contexts tried by the gap distinguisher.
    pub context_budget: usize,
    /// Challenges per side when scoring one context.
    pub context_samples: u64,
    pub step_limit: u64,
}

impl ReduceParams {
    pub fn for_rounds(k: usize) -> Self {
        assert!(k >= 1);
        let m = 3 << (k - 1);
        let tau = default_tau(m);
        Self {
            k,
            m,
            samples: hoeffding_samples(tau / 2.0, DELTA),
            tau,
            advice_budget: 32,
            context_budget: 8,
            context_samples: hoeffding_samples(tau / 4.0, DELTA),
            step_limit: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn validate(&self, student: &dyn Student) -> Result<(), ReductionError> {
        if self.k == 0 {
            return Err(ReductionError::NonPositive("k"));
        }
        let expected = 3usize << (self.k - 1);
        if self.m != expected {
            return Err(ReductionError::ChainShape { k: self.k, m: self.m, expected });
        }
        if student.rounds() != self.k {
            return Err(ReductionError::RoundMismatch { k: self.k, student: student.rounds() });
        }
        for (name, v) in [
            ("samples", self.samples),
            ("advice_budget", self.advice_budget as u64),
            ("context_budget", self.context_budget as u64),
            ("context_samples", self.context_samples),
            ("step_limit", self.step_limit),
        ] {
            if v == 0 {
                return Err(ReductionError::NonPositive(name));
            }
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(ReductionError::NonPositive("tau"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Gap,
    Shrink,
    Endgame,
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdviceSearch {
    pub start: usize,
    pub end: usize,
    pub side: Side,
    pub answer: usize,
    pub threshold: f64,
    /// Estimated frequency of `answer` for each candidate tried, in order.
    pub candidate_frequencies: Vec<f64>,
    pub accepted: Option<usize>,
    #[serde(skip)]
    pub members: Option<Vec<Member>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContextSearch {
    pub gap: Gap,
    /// Oriented gap estimate per candidate context.
    pub context_gaps: Vec<f64>,
    pub best: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub active: [usize; 2],
    pub table: Option<FrequencyTable>,
    pub branch: Branch,
    pub gap: Option<ContextSearch>,
    pub advice: Option<AdviceSearch>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReduceOutcome {
    Gap { round: usize, t: usize, answer: usize, direction: Direction, estimated_gap: f64 },
    GapFailed { round: usize, best_gap: f64 },
    Endgame { a: usize },
    Aborted { round: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub pair_id: String,
    pub student: String,
    pub params: ReduceParams,
    pub rounds: Vec<RoundReport>,
    pub path: Vec<usize>,
    pub outcome: ReduceOutcome,
    pub advice_fingerprint: String,
}

pub struct Reduction {
    pub distinguisher: Distinguisher,
    pub report: ReductionReport,
}

impl Reduction {
    /// The reduction produced only a coin.
    pub fn failed(&self) -> bool {
        self.distinguisher.is_degenerate()
    }
}

fn ctx_for<'a>(
    student: &'a dyn Student,
    token: &'a ProofToken,
    round: usize,
    path: &'a [usize],
    params: &ReduceParams,
    pair: &NpPair,
) -> RoundCtx<'a> {
    RoundCtx { student, token, round, path, step_limit: params.step_limit, witness_len: pair.witness_len() }
}

/// Tries up to `budget` random contexts from `W_t` with position `t+1` left
/// open, keeping the one whose oriented gap estimate is largest. A context
/// below `tau/2` yields a coin.
#[allow(clippy::too_many_arguments)]
pub fn build_gap_distinguisher(
    ctx: &RoundCtx<'_>,
    handle: StudentHandle,
    pair: &NpPair,
    universe: &HybridUniverse,
    advice: &Advice,
    gap: Gap,
    params: &ReduceParams,
    stream: &SeedStream,
    fallback: SeedStream,
) -> Result<(Distinguisher, ContextSearch), PairError> {
    let pos = gap.t + 1;
    let sign = if gap.direction == Direction::Increase { 1.0 } else { -1.0 };
    let mut context_gaps = Vec::with_capacity(params.context_budget);
    let mut best: Option<(usize, f64, crate::game::WitnessMap)> = None;
    for c in 0..params.context_budget {
        let (_, mut context) = universe.sample(pair, gap.t, &mut stream.rng(c as u64))?;
        context.remove(&pos);
        let scoring = stream.child_n("score", c as u64);
        let (hits_u, hits_v) = (0..params.context_samples)
            .into_par_iter()
            .map(|j| -> Result<(u64, u64), PairError> {
                let mut rng = scoring.rng(j);
                let xu = pair.sample_member(Side::U, &mut rng)?.x;
                let xv = pair.sample_member(Side::V, &mut rng)?.x;
                let hit = |x, rng: &mut rand_chacha::ChaCha8Rng| {
                    (embed_and_replay(ctx, universe.m, &context, pos, x, rng) == Replay::Answer(gap.answer)) as u64
                };
                Ok((hit(xu, &mut rng), hit(xv, &mut rng)))
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        let est = sign * (hits_u as f64 - hits_v as f64) / params.context_samples as f64;
        context_gaps.push(est);
        if best.as_ref().is_none_or(|b| est > b.1) {
            best = Some((c, est, context));
        }
    }
    let (best_idx, best_gap, context) = best.expect("context budget is positive");
    let mut search = ContextSearch { gap, context_gaps, best: None };
    if best_gap < params.tau / 2.0 {
        let reason = format!("best context gap {best_gap:.4} is below tau/2 = {:.4}", params.tau / 2.0);
        return Ok((Distinguisher::coin(reason, fallback), search));
    }
    search.best = Some(best_idx);
    let dist = Distinguisher {
        kind: DistinguisherKind::Gap {
            round: ctx.round,
            t: gap.t,
            answer: gap.answer,
            direction: gap.direction,
            context,
            estimated_gap: best_gap,
        },
        advice: advice.clone(),
        student: Some(handle),
        fallback,
    };
    Ok((dist, search))
}

/// Samples candidate blocks for positions `start..start+len` on `side` and
/// returns the first one under which the current round still answers
/// `answer` with estimated frequency at least `1/(2m)` minus the Hoeffding
/// radius (and never zero, which matters when the radius swamps `1/(2m)`).
#[allow(clippy::too_many_arguments)]
pub fn search_advice_block(
    ctx: &RoundCtx<'_>,
    pair: &NpPair,
    universe: &HybridUniverse,
    start: usize,
    len: usize,
    side: Side,
    answer: usize,
    params: &ReduceParams,
    stream: &SeedStream,
) -> Result<AdviceSearch, PairError> {
    let threshold = 1.0 / (2 * universe.m) as f64 - hoeffding_radius(params.samples, DELTA);
    let mut search = AdviceSearch {
        start,
        end: start + len - 1,
        side,
        answer,
        threshold,
        candidate_frequencies: Vec::new(),
        accepted: None,
        members: None,
    };
    for c in 0..params.advice_budget {
        let mut rng = stream.rng(c as u64);
        let members = (0..len).map(|_| pair.sample_member(side, &mut rng)).collect::<Result<Vec<_>, _>>()?;
        let shrunk = universe.fix(start, &members);
        let scoring = stream.child_n("score", c as u64);
        let hits: u64 = (0..params.samples)
            .into_par_iter()
            .map(|j| -> Result<u64, PairError> {
                let mut rng = scoring.rng(j);
                let (_, a, known) = shrunk.sample_mixture(pair, &mut rng)?;
                Ok((replay(ctx, &a, &known, &mut rng) == Replay::Answer(answer)) as u64)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        let freq = hits as f64 / params.samples as f64;
        search.candidate_frequencies.push(freq);
        if freq > 0.0 && freq >= threshold {
            search.accepted = Some(c);
            search.members = Some(members);
            break;
        }
    }
    Ok(search)
}

/// Runs the reduction. Statistical failures (no usable context, advice search
/// exhausted, a student stuck on its budget) yield a coin distinguisher and
/// are recorded in the report; only configuration and sampler errors are
/// returned as `Err`.
pub fn kpt_reduce(
    student: Arc<dyn Student>,
    pair: &NpPair,
    params: &ReduceParams,
    stream: &SeedStream,
) -> Result<Reduction, ReductionError> {
    params.validate(student.as_ref())?;
    let (k, m) = (params.k, params.m);
    let token = ProofToken::new(pair, m);
    let fallback = stream.child("fallback");
    let handle = StudentHandle {
        student: student.clone(),
        token: token.clone(),
        m,
        step_limit: params.step_limit,
        witness_len: pair.witness_len(),
        coins: stream.child("coins"),
    };
    let mut universe = HybridUniverse::new(m);
    let mut advice = Advice::default();
    let mut rounds = Vec::new();

    let finish = |distinguisher: Distinguisher, rounds, advice: &Advice, outcome| Reduction {
        report: ReductionReport {
            pair_id: pair.pair_id().to_owned(),
            student: student.name(),
            params: params.clone(),
            rounds,
            path: advice.path.clone(),
            outcome,
            advice_fingerprint: advice.fingerprint(),
        },
        distinguisher,
    };

    for r in 1..=k {
        let active = [universe.lo, universe.hi];
        let ctx = ctx_for(student.as_ref(), &token, r, &advice.path, params, pair);
        if r == k && k > 1 {
            break;
        }
        let table =
            estimate_frequency_table(&ctx, pair, &universe, params.samples, &stream.child_n("table", r as u64))?;
        let budget_share = (0..table.boundaries.len()).map(|row| table.freq(row, table.budget_column())).sum::<f64>()
            / table.boundaries.len() as f64;
        if budget_share > table.gamma {
            let reason =
                format!("student exhausted its step budget on {:.1}% of round-{r} samples", 100.0 * budget_share);
            rounds.push(RoundReport {
                round: r,
                active,
                table: Some(table),
                branch: Branch::Aborted,
                gap: None,
                advice: None,
            });
            let outcome = ReduceOutcome::Aborted { round: r, reason: reason.clone() };
            return Ok(finish(Distinguisher::coin(reason, fallback), rounds, &advice, outcome));
        }
        if let Some(gap) = find_adjacent_gap(&table, table.i_star, params.tau) {
            let (dist, search) = build_gap_distinguisher(
                &ctx,
                handle.clone(),
                pair,
                &universe,
                &advice,
                gap,
                params,
                &stream.child_n("context", r as u64),
                fallback.clone(),
            )?;
            let outcome = match (&dist.kind, search.best) {
                (DistinguisherKind::Gap { estimated_gap, .. }, Some(_)) => ReduceOutcome::Gap {
                    round: r,
                    t: gap.t,
                    answer: gap.answer,
                    direction: gap.direction,
                    estimated_gap: *estimated_gap,
                },
                _ => ReduceOutcome::GapFailed {
                    round: r,
                    best_gap: search.context_gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                },
            };
            rounds.push(RoundReport {
                round: r,
                active,
                table: Some(table),
                branch: Branch::Gap,
                gap: Some(search),
                advice: None,
            });
            return Ok(finish(dist, rounds, &advice, outcome));
        }
        if r == k {
            rounds.push(RoundReport {
                round: r,
                active,
                table: Some(table),
                branch: Branch::Endgame,
                gap: None,
                advice: None,
            });
            break;
        }

        // Fix the half whose strings let the advice refute the answer: the
        // lower half (U) when x_{i*+1} is there or just past it, else the
        // upper half (V), which then holds x_{i*}.
        let i_star = table.i_star;
        let half = universe.active_len() / 2;
        let (start, side) =
            if i_star < universe.lo + half { (universe.lo, Side::U) } else { (universe.lo + half, Side::V) };
        let search = search_advice_block(
            &ctx,
            pair,
            &universe,
            start,
            half,
            side,
            i_star,
            params,
            &stream.child_n("advice", r as u64),
        )?;
        let Some(members) = search.members.clone() else {
            let reason = format!("advice search exhausted after {} candidates", params.advice_budget);
            rounds.push(RoundReport {
                round: r,
                active,
                table: Some(table),
                branch: Branch::Aborted,
                gap: None,
                advice: Some(search),
            });
            let outcome = ReduceOutcome::Aborted { round: r, reason: reason.clone() };
            return Ok(finish(Distinguisher::coin(reason, fallback), rounds, &advice, outcome));
        };
        universe = universe.fix(start, &members);
        advice.blocks.push(AdviceBlock { round: r, start, side, members });
        advice.path.push(i_star);
        rounds.push(RoundReport {
            round: r,
            active,
            table: Some(table),
            branch: Branch::Shrink,
            gap: None,
            advice: Some(search),
        });
    }

    debug_assert_eq!(universe.active_len(), 3);
    let a = universe.lo;
    let mut rng = stream.child("frame").rng(0);
    advice.frame = Some(Frame {
        a,
        lower: pair.sample_member(Side::U, &mut rng).map_err(ReductionError::Pair)?,
        upper: pair.sample_member(Side::V, &mut rng).map_err(ReductionError::Pair)?,
    });
    if k > 1 {
        rounds.push(RoundReport {
            round: k,
            active: [universe.lo, universe.hi],
            table: None,
            branch: Branch::Endgame,
            gap: None,
            advice: None,
        });
    }
    let dist = Distinguisher {
        kind: DistinguisherKind::Endgame { rounds: k },
        advice: advice.clone(),
        student: Some(handle),
        fallback,
    };
    Ok(finish(dist, rounds, &advice, ReduceOutcome::Endgame { a }))
}
