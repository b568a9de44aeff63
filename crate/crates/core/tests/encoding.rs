use std::collections::BTreeSet;

use kptlab::bits::{BitString, Side, Witness};
use kptlab::encoding::{
    build_disjunction, canonical_assignment, disjunct_blocks, export_dimacs, read_dimacs, tseitin, verifier_circuit,
    write_dimacs, Polarity, Validity, VarRole,
};
use kptlab::np_pair::{make_easy_pair, make_perm_pair, NpPair, PermPairConfig};
use proptest::prelude::*;

mod common;
use common::sat_with_inputs;

fn perm(n: u8, seed: u64) -> NpPair {
    make_perm_pair(&PermPairConfig::new(n, seed)).unwrap()
}

#[test]
fn table_circuit_matches_verifier_n6_seed7() {
    let pair = perm(6, 7);
    for side in [Side::U, Side::V] {
        let c = verifier_circuit(&pair, side).unwrap();
        for x in BitString::all(6) {
            for s in BitString::all(6) {
                assert_eq!(c.eval(x, s), pair.verify(side, x, Witness(s)), "{side} x={x} s={s}");
            }
        }
    }
}

/// Projection of the Tseitin CNF onto (x, w) equals the circuit's accepting
/// set; for the negated encoding, its rejecting set.
fn check_projection(pair: &NpPair) {
    for side in [Side::U, Side::V] {
        let c = verifier_circuit(pair, side).unwrap();
        let pos = tseitin(&c, Polarity::AsIs);
        let neg = tseitin(&c, Polarity::Negated);
        pos.check().unwrap();
        for x in BitString::all(pair.n()) {
            for w in BitString::all(pair.witness_len()) {
                let inputs: Vec<bool> = x.bits().chain(w.bits()).collect();
                let accepts = pair.verify(side, x, Witness(w));
                assert_eq!(sat_with_inputs(&pos, &inputs), accepts, "{} {side} x={x} w={w}", pair.pair_id());
                assert_eq!(sat_with_inputs(&neg, &inputs), !accepts);
                let canon = canonical_assignment(&c, x, w);
                assert_eq!(pos.eval(&canon), accepts);
                assert_eq!(neg.eval(&canon), !accepts);
            }
        }
    }
}

#[test]
fn tseitin_projection_perm_n3() {
    check_projection(&perm(3, 42));
}

#[test]
fn tseitin_projection_exhaustive_up_to_n6() {
    for n in 4..=6 {
        check_projection(&perm(n, 7));
        check_projection(&make_easy_pair(n).unwrap());
    }
}

#[test]
fn disjunction_is_valid_on_small_instances() {
    for m in [2, 3] {
        let inst = build_disjunction(&perm(3, 42), m).unwrap();
        assert_eq!(inst.check_validity().unwrap(), Validity::Valid, "perm n3 m{m}");
    }
    for m in [2, 3, 4] {
        let inst = build_disjunction(&make_easy_pair(3).unwrap(), m).unwrap();
        assert_eq!(inst.check_validity().unwrap(), Validity::Valid, "easy n3 m{m}");
    }
}

#[test]
fn tautology_for_every_pair_up_to_n4_m4() {
    for n in 3..=4 {
        for pair in [perm(n, 1), perm(n, 42), make_easy_pair(n).unwrap()] {
            for m in 2..=4 {
                let inst = build_disjunction(&pair, m).unwrap();
                assert!(inst.check_validity().unwrap().is_valid(), "{} m{m}", pair.pair_id());
            }
        }
    }
}

/// Dropping an edge disjunct leaves exactly the constant tuples unrefuted.
#[test]
fn corrupted_fixtures_are_caught() {
    for pair in [perm(3, 42), make_easy_pair(3).unwrap()] {
        let m = 3;
        let inst = build_disjunction(&pair, m).unwrap();
        for (dropped, side) in [(m, Side::U), (0, Side::V)] {
            let Validity::Invalid(f) = inst.without_disjunct(dropped).check_validity().unwrap() else {
                panic!("{} without disjunct {dropped} still valid", pair.pair_id());
            };
            assert_eq!(f.x.len(), m);
            for x in &f.x {
                assert!(pair.membership(*x).contains(side), "{x} not in {side}");
            }
            for (d, ws) in &f.witnesses {
                assert!(!inst.eval_disjunct(*d, &f.x, ws).unwrap());
            }
        }
        // Middle disjuncts are needed too.
        assert!(!inst.without_disjunct(1).check_validity().unwrap().is_valid());
    }
}

#[test]
fn disjunct_variables_are_private_except_shared_x() {
    let inst = build_disjunction(&make_easy_pair(3).unwrap(), 3).unwrap();
    let mut seen: Vec<BTreeSet<u32>> = Vec::new();
    for dj in &inst.disjuncts {
        let mut own = BTreeSet::new();
        let mut xs = BTreeSet::new();
        for c in &dj.cnf.clauses {
            for l in c {
                match inst.roles[l.var as usize] {
                    VarRole::XBit { position, .. } => {
                        xs.insert(position);
                    }
                    VarRole::WitnessBit { disjunct, .. } | VarRole::TseitinAux { disjunct, .. } => {
                        assert_eq!(disjunct, dj.index);
                        own.insert(l.var);
                    }
                }
            }
        }
        let expected: BTreeSet<usize> = disjunct_blocks(dj.index, 3).into_iter().map(|(_, p)| p).collect();
        assert_eq!(xs, expected, "disjunct {}", dj.index);
        for other in &seen {
            assert!(other.is_disjoint(&own));
        }
        seen.push(own);
    }
    for (p, r) in inst.x_vars.iter().enumerate() {
        for v in r.clone() {
            assert!(matches!(inst.roles[v as usize], VarRole::XBit { position, .. } if position == p + 1));
        }
    }
}

#[test]
fn eval_disjunct_is_the_predicate_semantics_exhaustively_n3() {
    let pair = perm(3, 42);
    let m = 3;
    let inst = build_disjunction(&pair, m).unwrap();
    for d in 0..=m {
        let blocks = disjunct_blocks(d, m);
        for xv in 0..1u32 << 9 {
            let xs: Vec<BitString> = (0..3).map(|p| BitString::new((xv >> (3 * p)) & 7, 3).unwrap()).collect();
            for wv in 0..1u32 << (3 * blocks.len()) {
                let ws: Vec<Witness> =
                    (0..blocks.len()).map(|j| Witness(BitString::new((wv >> (3 * j)) & 7, 3).unwrap())).collect();
                let direct = blocks.iter().zip(&ws).all(|(&(side, pos), &w)| !pair.verify(side, xs[pos - 1], w));
                assert_eq!(inst.eval_disjunct(d, &xs, &ws).unwrap(), direct);
            }
        }
    }
}

#[test]
fn dimacs_roundtrip_single_formula() {
    let c = verifier_circuit(&perm(4, 3), Side::V).unwrap();
    let cnf = tseitin(&c, Polarity::Negated);
    let mut buf = Vec::new();
    write_dimacs(&cnf, &mut buf).unwrap();
    let back = read_dimacs(&buf[..]).unwrap();
    assert_eq!(back, cnf);
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().find(|l| l.starts_with("p cnf")).unwrap();
    assert_eq!(header, format!("p cnf {} {}", cnf.num_vars, cnf.clauses.len()));
}

#[test]
fn dimacs_export_roundtrips_every_disjunct() {
    let dir = tempfile::tempdir().unwrap();
    let inst = build_disjunction(&perm(3, 42), 3).unwrap();
    let manifest = export_dimacs(&inst, dir.path()).unwrap();
    assert_eq!(manifest.files.len(), 4);
    assert_eq!(manifest.shared_x.len(), 3);
    assert!(dir.path().join("manifest.json").exists());
    for f in &manifest.files {
        let text = std::fs::read(dir.path().join(&f.file)).unwrap();
        let back = read_dimacs(&text[..]).unwrap();
        let dj = inst.disjunct(f.disjunct).unwrap();
        assert_eq!(back.clauses, dj.cnf.clauses);
        assert_eq!(back.num_vars, dj.cnf.num_vars);
        assert_eq!(f.num_clauses, dj.cnf.clauses.len());
    }
}

#[test]
fn malformed_dimacs_is_rejected() {
    assert!(read_dimacs(&b"p cnf 2 1\n1 -2 0\n"[..]).is_err());
    assert!(read_dimacs(&b"c x 1=1+2\np cnf 2 1\n1 -3 0\n"[..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_disjunct_faithful_up_to_n6(n in 3u8..=6, seed in any::<u64>(), d in 0usize..=3, xv in any::<[u32; 3]>(), wv in any::<[u32; 2]>(), planted in any::<bool>()) {
        let pair = perm(n, seed);
        let m = 3;
        let inst = build_disjunction(&pair, m).unwrap();
        let mask = (1u32 << n) - 1;
        let xs: Vec<BitString> = xv.iter().map(|&v| BitString::new(v & mask, n).unwrap()).collect();
        let blocks = disjunct_blocks(d, m);
        let mut ws: Vec<Witness> = (0..blocks.len()).map(|j| Witness(BitString::new(wv[j] & mask, n).unwrap())).collect();
        if planted {
            // Random witnesses almost never verify; plant a real one.
            let (side, pos) = blocks[0];
            if let Some(w) = pair.find_witness(xs[pos - 1], side).unwrap() {
                ws[0] = w;
            }
        }
        let direct = blocks.iter().zip(&ws).all(|(&(side, pos), &w)| !pair.verify(side, xs[pos - 1], w));
        prop_assert_eq!(inst.eval_disjunct(d, &xs, &ws).unwrap(), direct);
    }

    #[test]
    fn dimacs_roundtrip_random_circuits(n in 3u8..=5, seed in any::<u64>(), u in any::<bool>()) {
        let side = if u { Side::U } else { Side::V };
        let c = verifier_circuit(&perm(n, seed), side).unwrap();
        let cnf = tseitin(&c, Polarity::AsIs);
        let mut buf = Vec::new();
        write_dimacs(&cnf, &mut buf).unwrap();
        prop_assert_eq!(read_dimacs(&buf[..]).unwrap(), cnf);
    }
}
