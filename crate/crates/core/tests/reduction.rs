use std::sync::Arc;

use kptlab::bits::{BitString, Side};
use kptlab::game::{
    ConstantStudent, MsbStudent, OmniscientStudent, ParityAnswer, ParityStudent, ProofToken, RandomStudent, Student,
    TwoRoundStudent, DEFAULT_STEP_BUDGET,
};
use kptlab::np_pair::{make_easy_pair, make_perm_pair, NpPair, PermPairConfig};
use kptlab::reduction::reduce::search_advice_block;
use kptlab::reduction::{
    adjacent_gaps, default_tau, estimate_frequency_table, exact_frequency_table, find_adjacent_gap, kpt_reduce,
    measure_advantage, sample_hybrid, Branch, Direction, Distinguisher, DistinguisherKind, FrequencyTable,
    HybridUniverse, ReduceOutcome, ReduceParams, ReductionError, RoundCtx,
};
use kptlab::stats::binomial_sigma;
use kptlab::SeedStream;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn perm(n: u8, seed: u64) -> Arc<NpPair> {
    Arc::new(make_perm_pair(&PermPairConfig::new(n, seed)).unwrap())
}

fn round_one<'a>(student: &'a dyn Student, token: &'a ProofToken, pair: &NpPair) -> RoundCtx<'a> {
    RoundCtx { student, token, round: 1, path: &[], step_limit: DEFAULT_STEP_BUDGET, witness_len: pair.witness_len() }
}

/// Brute-force side membership, independent of the sampler.
fn in_side(pair: &NpPair, side: Side, x: BitString) -> bool {
    BitString::all(pair.witness_len()).any(|w| pair.verify(side, x, kptlab::Witness(w)))
}

#[test]
fn hybrid_patterns_follow_the_definition() {
    let u = HybridUniverse::new(3);
    let pattern = |i| (1..=3).map(|p| u.side_at(i, p)).collect::<Vec<_>>();
    assert_eq!(pattern(1), vec![Side::U, Side::V, Side::V]);
    assert_eq!(pattern(2), vec![Side::U, Side::U, Side::V]);
    assert_eq!(u.boundaries().collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn hybrid_samples_stay_in_their_support() {
    let pair = perm(8, 42);
    let m = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 0..1000 {
        let i = 1 + d % (m - 1);
        let (a, known) = sample_hybrid(&pair, m, i, &mut rng).unwrap();
        assert!(in_side(&pair, Side::U, a[0]));
        assert!(in_side(&pair, Side::V, a[m - 1]));
        for p in 1..=m {
            let mem = known[&p];
            assert_eq!(mem.x, a[p - 1]);
            assert_eq!(mem.side, if p <= i { Side::U } else { Side::V });
            assert!(pair.verify(mem.side, mem.x, mem.witness));
        }
    }
}

#[test]
fn fixing_a_block_shrinks_the_active_range() {
    let pair = perm(8, 42);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let us: Vec<_> = (0..3).map(|_| pair.sample_member(Side::U, &mut rng).unwrap()).collect();
    let vs: Vec<_> = (0..3).map(|_| pair.sample_member(Side::V, &mut rng).unwrap()).collect();
    let lower = HybridUniverse::new(6).fix(1, &us);
    assert_eq!((lower.lo, lower.hi), (4, 6));
    let upper = HybridUniverse::new(6).fix(4, &vs);
    assert_eq!((upper.lo, upper.hi), (1, 3));
    for i in lower.boundaries() {
        let (a, _) = lower.sample(&pair, i, &mut rng).unwrap();
        assert_eq!(&a[..3], &us.iter().map(|m| m.x).collect::<Vec<_>>()[..]);
        assert!(in_side(&pair, Side::V, a[5]));
    }
}

#[test]
fn omniscient_exact_table_is_diagonal() {
    for n in [4, 6] {
        let pair = perm(n, 42);
        let student = OmniscientStudent::new(pair.clone());
        let token = ProofToken::new(&pair, 3);
        let ctx = round_one(&student, &token, &pair);
        let t = exact_frequency_table(&ctx, &pair, &HybridUniverse::new(3), &SeedStream::root(0)).unwrap();
        for (row, &i) in t.boundaries.iter().enumerate() {
            assert_eq!(t.totals[row], 1u64 << (3 * (n - 1)));
            for ans in 0..=3 {
                assert_eq!(t.freq(row, ans), if ans == i { 1.0 } else { 0.0 }, "n={n} W_{i} answer {ans}");
            }
        }
        assert_eq!((t.gamma, t.i_star), (0.5, 1));
    }
}

#[test]
fn sampled_tables_match_exact_cells() {
    // The msb student has fractional cells on a permutation pair.
    let pair = perm(6, 42);
    let student = MsbStudent;
    let token = ProofToken::new(&pair, 3);
    let ctx = round_one(&student, &token, &pair);
    let universe = HybridUniverse::new(3);
    let exact = exact_frequency_table(&ctx, &pair, &universe, &SeedStream::root(0)).unwrap();
    let samples = 5000;
    for seed in 0..5 {
        let est = estimate_frequency_table(&ctx, &pair, &universe, samples, &SeedStream::root(seed)).unwrap();
        for row in 0..exact.boundaries.len() {
            assert_eq!(est.totals[row], samples);
            for col in 0..exact.counts[row].len() {
                let p = exact.counts[row][col] as f64 / exact.totals[row] as f64;
                let q = est.counts[row][col] as f64 / samples as f64;
                assert!(
                    (p - q).abs() <= 4.0 * binomial_sigma(p, samples),
                    "seed {seed} row {row} col {col}: {p} vs {q}"
                );
            }
        }
    }
}

#[test]
fn constant_student_concentrates_every_row() {
    let pair = perm(8, 42);
    let student = ConstantStudent::new(2, 1);
    let token = ProofToken::new(&pair, 6);
    let ctx = round_one(&student, &token, &pair);
    let t = estimate_frequency_table(&ctx, &pair, &HybridUniverse::new(6), 200, &SeedStream::root(3)).unwrap();
    assert_eq!((t.gamma, t.i_star), (1.0, 2));
    assert!((0..t.boundaries.len()).all(|r| t.freq(r, 2) == 1.0));
    assert!(find_adjacent_gap(&t, 2, default_tau(6)).is_none());
}

#[test]
fn random_student_cells_are_one_seventh() {
    let pair = perm(8, 42);
    let student = RandomStudent { k: 1 };
    let token = ProofToken::new(&pair, 6);
    let ctx = round_one(&student, &token, &pair);
    let n = 10_000;
    let t = estimate_frequency_table(&ctx, &pair, &HybridUniverse::new(6), n, &SeedStream::root(4)).unwrap();
    let p = 1.0 / 7.0;
    for row in 0..t.boundaries.len() {
        assert_eq!(t.totals[row], n);
        for ans in 0..=6 {
            let q = t.freq(row, ans);
            assert!((q - p).abs() <= 3.0 * binomial_sigma(p, n), "row {row} answer {ans}: {q}");
        }
    }
}

fn diagonal(m: usize) -> FrequencyTable {
    let boundaries: Vec<usize> = (1..m).collect();
    let counts = boundaries
        .iter()
        .map(|&i| {
            let mut row = vec![0; m + 3];
            row[i] = 10;
            row
        })
        .collect();
    FrequencyTable::from_counts(1, m, boundaries, counts)
}

#[test]
fn gap_finder_examples() {
    let m = 6;
    let uniform = FrequencyTable::from_counts(1, m, (1..m).collect(), vec![vec![5; m + 3]; m - 1]);
    assert!((0..=m).all(|a| find_adjacent_gap(&uniform, a, default_tau(m)).is_none()));
    assert!((default_tau(6) - 1.0 / 24.0).abs() < 1e-15);

    let d = diagonal(m);
    assert_eq!(d.i_star, 1);
    for answer in 2..m {
        let g = find_adjacent_gap(&d, answer, 0.5).unwrap();
        assert_eq!((g.t, g.direction), (answer - 1, Direction::Increase));
    }
    // Row 0 does not exist, so the lowest answer only has its upper neighbour.
    let g = find_adjacent_gap(&d, 1, 0.5).unwrap();
    assert_eq!((g.t, g.direction), (1, Direction::Decrease));
    // Every interior answer fires on both sides.
    for answer in 2..m - 1 {
        let gaps = adjacent_gaps(&d, answer, 0.5);
        assert_eq!(gaps.iter().map(|g| g.t).collect::<Vec<_>>(), vec![answer - 1, answer]);
    }
}

#[test]
fn advice_search_accepts_the_first_block_when_answers_are_fixed() {
    let pair = perm(8, 42);
    let params = ReduceParams::for_rounds(2);
    let token = ProofToken::new(&pair, 6);
    for student in [
        Box::new(ConstantStudent::new(2, 2)) as Box<dyn Student>,
        Box::new(ParityStudent::new(pair.clone(), ParityAnswer::Index(2), ParityAnswer::Index(2), 2)),
    ] {
        let ctx = round_one(student.as_ref(), &token, &pair);
        let s =
            search_advice_block(&ctx, &pair, &HybridUniverse::new(6), 1, 3, Side::U, 2, &params, &SeedStream::root(5))
                .unwrap();
        assert_eq!(s.accepted, Some(0), "{}", student.name());
        assert!(s.members.as_ref().unwrap().iter().all(|m| m.side == Side::U && pair.verify(Side::U, m.x, m.witness)));
        assert_eq!(s.candidate_frequencies, vec![1.0]);
    }
}

#[test]
fn advice_search_trials_follow_the_parity_split() {
    let pair = perm(8, 42);
    let (u, _) = pair.side_lists().unwrap();
    let p_even = u.iter().filter(|x| !x.parity()).count() as f64 / u.len() as f64;
    let student = ParityStudent::new(pair.clone(), ParityAnswer::Index(1), ParityAnswer::Index(5), 2);
    let token = ProofToken::new(&pair, 6);
    let ctx = round_one(&student, &token, &pair);
    let mut params = ReduceParams::for_rounds(2);
    params.samples = 1000;
    let runs = 200u64;
    let mut trials = 0usize;
    for seed in 0..runs {
        let s = search_advice_block(
            &ctx,
            &pair,
            &HybridUniverse::new(6),
            1,
            3,
            Side::U,
            1,
            &params,
            &SeedStream::root(seed),
        )
        .unwrap();
        let c = s.accepted.expect("a parity-0 block within 32 tries");
        // Accepted blocks start with an even string, rejected ones with an odd one.
        assert!(!s.members.unwrap()[0].x.parity());
        assert!(s.candidate_frequencies[..c].iter().all(|&f| f == 0.0));
        assert_eq!(s.candidate_frequencies[c], 1.0);
        trials += c + 1;
    }
    let mean = trials as f64 / runs as f64;
    let expected = 1.0 / p_even;
    let sd = ((1.0 - p_even) / (p_even * p_even) / runs as f64).sqrt();
    assert!((mean - expected).abs() <= 3.0 * sd, "mean {mean} vs {expected}");
    assert!(expected <= 2.2, "parity split too uneven: {p_even}");
}

#[test]
fn omniscient_k1_takes_the_gap_branch() {
    let pair = perm(10, 42);
    let student: Arc<dyn Student> = Arc::new(OmniscientStudent::new(pair.clone()));
    let red = kpt_reduce(student, &pair, &ReduceParams::for_rounds(1), &SeedStream::root(0).child("reduce")).unwrap();
    assert!(matches!(red.report.outcome, ReduceOutcome::Gap { round: 1, .. }));
    assert_eq!(red.report.rounds.len(), 1);
    assert_eq!(red.report.rounds[0].branch, Branch::Gap);
    assert!(matches!(red.distinguisher.kind, DistinguisherKind::Gap { .. }));
    let est = measure_advantage(&red.distinguisher, &pair, 2000, &SeedStream::root(0).child("measure"));
    assert!(est.success_prob >= 0.95, "{est:?}");
    assert_eq!(est.failure_rate, 0.0);
}

#[test]
fn two_round_student_reaches_the_endgame() {
    let pair = perm(10, 42);
    let student: Arc<dyn Student> = Arc::new(TwoRoundStudent::new(pair.clone(), 1));
    let params = ReduceParams::for_rounds(2);
    let red = kpt_reduce(student, &pair, &params, &SeedStream::root(0).child("reduce")).unwrap();
    let report = &red.report;
    assert_eq!(report.outcome, ReduceOutcome::Endgame { a: 4 });
    assert_eq!(report.path, vec![1]);
    assert_eq!(report.rounds[0].branch, Branch::Shrink);
    let block = &red.distinguisher.advice.blocks[0];
    assert_eq!((block.start, block.side, block.members.len()), (1, Side::U, 3));
    let frame = red.distinguisher.advice.frame.as_ref().unwrap();
    assert_eq!(frame.challenge_position(), 5);
    assert!(pair.verify(Side::U, frame.lower.x, frame.lower.witness));
    assert!(pair.verify(Side::V, frame.upper.x, frame.upper.witness));

    // The residual classification is exact: an answer of a means V, a+1 means U.
    let (us, vs) = pair.side_lists().unwrap();
    for (list, want) in [(&us, true), (&vs, false)] {
        for (j, &x) in list.iter().enumerate().step_by(17) {
            let c = red.distinguisher.classify(x, j as u64);
            assert_eq!((c.bit, c.fallback), (want, None));
        }
    }
    let est = measure_advantage(&red.distinguisher, &pair, 10_000, &SeedStream::root(0).child("measure"));
    assert!(est.success_prob >= 0.5 + 1.0 / (4.0 * params.m as f64));
    assert!(est.ci_low > 0.5);
}

#[test]
fn null_controls() {
    let pair = perm(10, 42);
    let measure = SeedStream::root(1).child("measure");
    let coin = Distinguisher::coin("null control", SeedStream::root(1).child("fallback"));
    let est = measure_advantage(&coin, &pair, 10_000, &measure);
    assert!((est.success_prob - 0.5).abs() <= 0.015, "{est:?}");
    assert_eq!(est.failure_rate, 1.0);

    let easy = make_easy_pair(10).unwrap();
    let msb = Distinguisher::read_bit(9, SeedStream::root(1));
    assert_eq!(measure_advantage(&msb, &easy, 10_000, &measure).success_prob, 1.0);

    for k in [1, 2] {
        let student: Arc<dyn Student> = Arc::new(RandomStudent { k });
        let red =
            kpt_reduce(student, &pair, &ReduceParams::for_rounds(k), &SeedStream::root(1).child("reduce")).unwrap();
        let est = measure_advantage(&red.distinguisher, &pair, 10_000, &measure);
        assert!((est.success_prob - 0.5).abs() <= 0.015, "k={k}: {est:?}");
    }
}

#[test]
fn msb_student_on_the_easy_pair_is_perfect() {
    let pair = Arc::new(make_easy_pair(10).unwrap());
    let student: Arc<dyn Student> = Arc::new(MsbStudent);
    let red = kpt_reduce(student, &pair, &ReduceParams::for_rounds(1), &SeedStream::root(2).child("reduce")).unwrap();
    assert!(!red.failed());
    let est = measure_advantage(&red.distinguisher, &pair, 10_000, &SeedStream::root(2).child("measure"));
    assert_eq!(est.success_prob, 1.0);
}

#[test]
fn parameter_shape_is_enforced() {
    let pair = perm(8, 42);
    let student: Arc<dyn Student> = Arc::new(RandomStudent { k: 2 });
    let mut params = ReduceParams::for_rounds(2);
    params.m = 7;
    let err = kpt_reduce(student.clone(), &pair, &params, &SeedStream::root(0)).err().unwrap();
    assert_eq!(err, ReductionError::ChainShape { k: 2, m: 7, expected: 6 });
    let err = kpt_reduce(student.clone(), &pair, &ReduceParams::for_rounds(1), &SeedStream::root(0)).err().unwrap();
    assert_eq!(err, ReductionError::RoundMismatch { k: 1, student: 2 });
    let mut params = ReduceParams::for_rounds(2);
    params.samples = 0;
    let err = kpt_reduce(student, &pair, &params, &SeedStream::root(0)).err().unwrap();
    assert_eq!(err, ReductionError::NonPositive("samples"));
}

#[test]
fn reductions_are_reproducible() {
    let pair = perm(8, 42);
    let run = || {
        let student: Arc<dyn Student> = Arc::new(TwoRoundStudent::new(pair.clone(), 1));
        let red = kpt_reduce(student, &pair, &ReduceParams::for_rounds(2), &SeedStream::root(9)).unwrap();
        (serde_json::to_string(&red.report).unwrap(), red.distinguisher.advice.fingerprint())
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    /// Whatever the student, the reduction either stops at a gap or shrinks
    /// along the binary-search rule, and the advantage interval brackets its
    /// estimate.
    #[test]
    fn reduction_dichotomy(seed in any::<u64>(), even in 0usize..=6, odd in 0usize..=6, boundary in any::<bool>()) {
        let pair = perm(8, 42);
        let even = if boundary { ParityAnswer::Boundary } else { ParityAnswer::Index(even) };
        let student: Arc<dyn Student> = Arc::new(ParityStudent::new(pair.clone(), even, ParityAnswer::Index(odd), 2));
        let mut params = ReduceParams::for_rounds(2);
        params.samples = 400;
        params.context_samples = 200;
        let red = kpt_reduce(student, &pair, &params, &SeedStream::root(seed)).unwrap();
        let r = &red.report;
        prop_assert!(r.path.len() < params.k);
        for (round, block) in red.distinguisher.advice.blocks.iter().enumerate() {
            let i = r.path[round];
            // The block holds the string that refutes answer i: x_{i+1} (or
            // the U-anchor right after the block) when lower, x_i when upper.
            match block.side {
                Side::U => prop_assert!(block.start == 1 && i <= block.end()),
                Side::V => prop_assert!(block.end() == params.m && block.start <= i),
            }
        }
        match &r.outcome {
            ReduceOutcome::Gap { .. } | ReduceOutcome::GapFailed { .. } => {
                prop_assert_eq!(r.rounds.last().unwrap().branch, Branch::Gap)
            }
            ReduceOutcome::Endgame { a } => prop_assert!(*a >= 1 && *a + 2 <= params.m),
            ReduceOutcome::Aborted { .. } => prop_assert!(red.failed()),
        }
        let est = measure_advantage(&red.distinguisher, &pair, 200, &SeedStream::root(seed ^ 7));
        prop_assert!(est.ci_low <= est.success_prob && est.success_prob <= est.ci_high);
        prop_assert!((0.0..=1.0).contains(&est.ci_low) && (0.0..=1.0).contains(&est.ci_high));
    }
}
