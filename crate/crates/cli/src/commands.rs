//! The five subcommands. Each returns a JSON payload and an exit code.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use kptlab::encoding::{build_disjunction, export_dimacs, EncodingError, Validity};
use kptlab::game::{run_game, HonestTeacher, Outcome, ProofToken, Transcript, Verdict};
use kptlab::np_pair::{side_list_text, PairError};
use kptlab::reduction::{
    adjacent_gaps, estimate_frequency_table, exact_frequency_table, kpt_reduce, measure_advantage_at, sample_hybrid,
    HybridUniverse, ReductionError, RoundCtx,
};
use kptlab::stats::wilson_interval;
use kptlab::{BitString, NpPair, SeedStream};

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::write_atomic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_REDUCTION_ABORTED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

impl CliError {
    fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), msg: e.to_string() }
    }
}

pub struct CommandOutput {
    pub payload: Value,
    pub exit_code: i32,
}

/// Output-only options that never enter the config hash.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub emit_witnesses: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payload serialises")
}

/// Exhaustive checks of the pair hypotheses: disjointness, support of
/// `D_n`, and exact uniformity of its marginal on strings.
pub fn cmd_check_pair(cfg: &ExperimentConfig) -> Result<CommandOutput, CliError> {
    let pair = cfg.build_pair()?;
    if pair.n() > kptlab::np_pair::EXHAUSTIVE_MAX_N {
        return Err(ConfigError::Invalid(format!(
            "check-pair enumerates {{0,1}}^n and needs n <= {}",
            kptlab::np_pair::EXHAUSTIVE_MAX_N
        ))
        .into());
    }
    let (u, v) = pair.side_lists()?;
    let v_set: std::collections::BTreeSet<_> = v.iter().collect();
    let disjointness_violations = u.iter().filter(|x| v_set.contains(x)).count();

    let emissions = pair.enumerate_d()?;
    let support_violations = emissions.iter().filter(|e| !pair.verify(e.side, e.x, e.witness)).count();
    let mut mult: BTreeMap<BitString, u64> = BTreeMap::new();
    for e in &emissions {
        *mult.entry(e.x).or_default() += 1;
    }
    let universe = 1u64 << pair.n();
    let support_size = mult.len() as u64;
    let (lo, hi) = (mult.values().min().copied().unwrap_or(0), mult.values().max().copied().unwrap_or(0));
    let uniform = support_size == universe && lo == hi;

    let mut side_lists = Value::Null;
    if let Some(dir) = &cfg.side_lists_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let (up, vp) = (dir.join("U.txt"), dir.join("V.txt"));
        write_atomic(&up, side_list_text(&u).as_bytes()).map_err(|e| CliError::io(&up, e))?;
        write_atomic(&vp, side_list_text(&v).as_bytes()).map_err(|e| CliError::io(&vp, e))?;
        side_lists = json!({ "u": up.display().to_string(), "v": vp.display().to_string() });
    }

    let violations = disjointness_violations + support_violations;
    Ok(CommandOutput {
        payload: json!({
            "pair_id": pair.pair_id(),
            "n": pair.n(),
            "u_size": u.len(),
            "v_size": v.len(),
            "disjointness_violations": disjointness_violations,
            "support_violations": support_violations,
            "support_size": support_size,
            "support_complete": support_size == universe,
            "d_uniform": uniform,
            "string_multiplicity": [lo, hi],
            "violations": violations,
            "side_lists": side_lists,
        }),
        exit_code: if violations == 0 { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}

/// Builds the induction disjunction and checks it is a tautology.
pub fn cmd_validity(cfg: &ExperimentConfig) -> Result<CommandOutput, CliError> {
    let pair = cfg.build_pair()?;
    let mut inst = build_disjunction(&pair, cfg.m)?;
    if let Some(d) = cfg.drop_disjunct {
        if d > cfg.m {
            return Err(ConfigError::Invalid(format!("drop_disjunct = {d} is not in 0..={}", cfg.m)).into());
        }
        inst = inst.without_disjunct(d);
    }
    let manifest = match &cfg.dimacs_dir {
        Some(dir) => Some(export_dimacs(&inst, dir)?),
        None => None,
    };
    let disjuncts: Vec<Value> = inst
        .disjuncts
        .iter()
        .map(|dj| {
            json!({
                "index": dj.index,
                "blocks": dj.blocks.iter().map(|b| format!("{}@{}", b.side, b.position)).collect::<Vec<_>>(),
                "clauses": dj.cnf.clauses.len(),
            })
        })
        .collect();
    let cost = inst.validity_cost_log2();
    let validity = inst.check_validity()?;
    let (valid, falsifier) = match &validity {
        Validity::Valid => (true, Value::Null),
        Validity::Invalid(f) => (false, to_value(f)),
    };
    Ok(CommandOutput {
        payload: json!({
            "pair_id": pair.pair_id(),
            "n": pair.n(),
            "m": cfg.m,
            "dropped_disjunct": cfg.drop_disjunct,
            "num_vars": inst.num_vars,
            "disjuncts": disjuncts,
            "enumeration_log2": cost,
            "valid": valid,
            "counterexample": falsifier,
            "dimacs": manifest.map(|m| to_value(&m)),
        }),
        exit_code: if valid { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}

#[derive(Serialize)]
struct PlaySummary {
    games: u64,
    wins: u64,
    win_rate: f64,
    ci: (f64, f64),
    wins_by_round: BTreeMap<usize, u64>,
    budget_exhausted: u64,
    counterexamples: u64,
    counterexamples_falsifying: u64,
    cnf_checked: u64,
    cnf_falsifying: u64,
    transcripts: Option<String>,
}

/// Plays `games` games against the honest teacher on uniform hybrid inputs.
pub fn cmd_play(cfg: &ExperimentConfig) -> Result<CommandOutput, CliError> {
    let pair = Arc::new(cfg.build_pair()?);
    let student = cfg.build_student(&pair);
    let token = ProofToken::new(&pair, cfg.m);
    let teacher = HonestTeacher::new(pair.clone());
    let root = SeedStream::root(cfg.master_seed);
    let (sampling, coins) = (root.child("sampling"), root.child("coins"));
    let coins_id = coins.id();
    let transcripts: Vec<Transcript> = (0..cfg.games)
        .into_par_iter()
        .map(|g| -> Result<Transcript, PairError> {
            let mut rng = sampling.rng(g);
            let i = rng.gen_range(1..cfg.m);
            let (a, _) = sample_hybrid(&pair, cfg.m, i, &mut rng)?;
            run_game(
                student.as_ref(),
                &teacher,
                &token,
                &a,
                cfg.step_limit,
                &mut coins.rng(g),
                &format!("{coins_id}/{g}"),
            )
        })
        .collect::<Result<_, _>>()?;

    // Every refutation is checked against the verifiers, and against the CNF
    // encoding when the verifier circuits can be built.
    let inst = build_disjunction(&pair, cfg.m).ok();
    let mut s = PlaySummary {
        games: cfg.games,
        wins: 0,
        win_rate: 0.0,
        ci: (0.0, 0.0),
        wins_by_round: BTreeMap::new(),
        budget_exhausted: 0,
        counterexamples: 0,
        counterexamples_falsifying: 0,
        cnf_checked: 0,
        cnf_falsifying: 0,
        transcripts: None,
    };
    for t in &transcripts {
        if t.verdict == Verdict::StudentWins {
            s.wins += 1;
            *s.wins_by_round.entry(t.rounds.len()).or_default() += 1;
        }
        s.budget_exhausted += t.budget_exhausted as u64;
        for r in &t.rounds {
            if let Outcome::Refuted { counterexample: ce } = &r.outcome {
                s.counterexamples += 1;
                s.counterexamples_falsifying += ce.falsifies(&pair, &t.x) as u64;
                if let Some(inst) = &inst {
                    s.cnf_checked += 1;
                    s.cnf_falsifying += !inst.eval_disjunct(ce.disjunct, &t.x, &ce.witnesses)? as u64;
                }
            }
        }
    }
    s.win_rate = s.wins as f64 / cfg.games as f64;
    s.ci = wilson_interval(s.wins, cfg.games, cfg.confidence);
    if let Some(path) = &cfg.transcripts {
        let mut buf = String::new();
        for t in &transcripts {
            buf.push_str(&t.to_json_line());
            buf.push('\n');
        }
        write_atomic(path, buf.as_bytes()).map_err(|e| CliError::io(path, e))?;
        s.transcripts = Some(path.display().to_string());
    }
    let sound = s.counterexamples_falsifying == s.counterexamples && s.cnf_falsifying == s.cnf_checked;
    Ok(CommandOutput {
        payload: json!({
            "pair_id": pair.pair_id(),
            "student": student.name(),
            "k": student.rounds(),
            "m": cfg.m,
            "coins": coins_id,
            "summary": to_value(&s),
        }),
        exit_code: if sound { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}

/// Round-1 frequency table over `W[m]`: γ, `i*` and the adjacent gaps of `i*`.
pub fn cmd_claim2(cfg: &ExperimentConfig) -> Result<CommandOutput, CliError> {
    let pair = Arc::new(cfg.build_pair()?);
    let student = cfg.build_student(&pair);
    let token = ProofToken::new(&pair, cfg.m);
    let root = SeedStream::root(cfg.master_seed);
    let ctx = RoundCtx {
        student: student.as_ref(),
        token: &token,
        round: 1,
        path: &[],
        step_limit: cfg.step_limit,
        witness_len: pair.witness_len(),
    };
    let universe = HybridUniverse::new(cfg.m);
    let table = if cfg.exact {
        exact_frequency_table(&ctx, &pair, &universe, &root.child("coins"))?
    } else {
        estimate_frequency_table(&ctx, &pair, &universe, cfg.samples, &root.child("sampling"))?
    };
    let per_hybrid: Vec<Value> = table
        .boundaries
        .iter()
        .enumerate()
        .map(|(row, &i)| json!({ "boundary": i, "freq": table.freq(row, table.i_star) }))
        .collect();
    let gaps = adjacent_gaps(&table, table.i_star, cfg.tau);
    Ok(CommandOutput {
        payload: json!({
            "pair_id": pair.pair_id(),
            "student": student.name(),
            "mode": if cfg.exact { "exact" } else { "sampled" },
            "gamma": table.gamma,
            "i_star": table.i_star,
            "tau": cfg.tau,
            "per_hybrid": per_hybrid,
            "gaps": to_value(&gaps),
            "table": to_value(&table),
        }),
        exit_code: EXIT_OK,
    })
}

/// The reduction followed by an advantage measurement.
pub fn cmd_reduce(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let pair: Arc<NpPair> = Arc::new(cfg.build_pair()?);
    let student = cfg.build_student(&pair);
    let root = SeedStream::root(cfg.master_seed);
    let red = kpt_reduce(student, &pair, &cfg.reduce_params(), &root.child("reduce"))?;
    let estimate =
        measure_advantage_at(&red.distinguisher, &pair, cfg.measure_samples, cfg.confidence, &root.child("measure"));
    let advice = if opts.emit_witnesses { to_value(&red.distinguisher.advice) } else { Value::Null };
    let bound = 0.5 + 1.0 / (4 * cfg.m) as f64;
    Ok(CommandOutput {
        payload: json!({
            "reduction": to_value(&red.report),
            "distinguisher": to_value(&red.distinguisher.kind),
            "failed": red.failed(),
            "advice": advice,
            "estimate": to_value(&estimate),
            "target": bound,
            "meets_target": estimate.success_prob >= bound,
        }),
        exit_code: if red.failed() { EXIT_REDUCTION_ABORTED } else { EXIT_OK },
    })
}
