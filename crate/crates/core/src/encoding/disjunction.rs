//! The induction disjunction
//!
//! ```text
//! ¬U(x_1,y_1) ∨ ⋁_{i=1}^{m-1} [¬V(x_i,z_i) ∧ ¬U(x_{i+1},y_{i+1})] ∨ ¬V(x_m,z_m)
//! ```
//!
//! Disjunct `d` in `0..=m` is a conjunction of negated verifier blocks. Each
//! block is the Tseitin CNF of a verifier with its output asserted false, and
//! owns private witness and aux variables; only the x-tuples are shared.
//! Aux variables are always completed canonically (bottom-up from the
//! inputs), so a block evaluates to `¬verify(x, w)`.

use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{BitString, Side, Witness};
use crate::np_pair::NpPair;

use super::circuit::{verifier_circuit, Circuit};
use super::cnf::{tseitin_into, CnfFormula, Placement, Polarity, VarRole};
use super::EncodingError;

/// Positions a disjunct reads, and per value of those strings its smallest
/// falsifying witness vector.
type FalsifierTable = (Vec<usize>, Vec<Option<Vec<Witness>>>);

/// Exhaustive validity checks refuse instances above `2^24` evaluations.
pub const VALIDITY_BUDGET_LOG2: f64 = 24.0;

/// The negated verifier blocks of disjunct `d`, as `(side, position)`.
pub fn disjunct_blocks(d: usize, m: usize) -> Vec<(Side, usize)> {
    assert!(d <= m, "disjunct {d} out of range 0..={m}");
    if d == 0 {
        vec![(Side::U, 1)]
    } else if d == m {
        vec![(Side::V, m)]
    } else {
        vec![(Side::V, d), (Side::U, d + 1)]
    }
}

/// One negated verifier block inside a disjunct.
#[derive(Clone, Debug)]
pub struct Block {
    pub side: Side,
    pub position: usize,
    pub witness_vars: Range<u32>,
    pub aux_vars: Range<u32>,
    circuit: Arc<Circuit>,
}

impl Block {
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }
}

#[derive(Clone, Debug)]
pub struct Disjunct {
    pub index: usize,
    pub blocks: Vec<Block>,
    pub cnf: CnfFormula,
}

#[derive(Clone, Debug)]
pub struct DisjunctionInstance {
    pub m: usize,
    pub n: u8,
    pub witness_len: u8,
    pub pair_id: String,
    /// Variable ids of `x_p`, indexed by `p - 1`.
    pub x_vars: Vec<Range<u32>>,
    pub disjuncts: Vec<Disjunct>,
    pub num_vars: u32,
    pub roles: Arc<[VarRole]>,
}

/// Assignment falsifying every disjunct at once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Falsifier {
    pub x: Vec<BitString>,
    /// `(disjunct index, witness per block)`; aux values are canonical.
    pub witnesses: Vec<(usize, Vec<Witness>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(Falsifier),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

pub fn build_disjunction(pair: &NpPair, m: usize) -> Result<DisjunctionInstance, EncodingError> {
    if m < 2 {
        return Err(EncodingError::ChainTooShort(m));
    }
    let n = pair.n();
    let wl = pair.witness_len();
    let u = Arc::new(verifier_circuit(pair, Side::U)?);
    let v = Arc::new(verifier_circuit(pair, Side::V)?);

    let mut roles = Vec::new();
    let mut x_vars = Vec::with_capacity(m);
    for p in 1..=m {
        let start = roles.len() as u32;
        roles.extend((0..n).map(|bit| VarRole::XBit { position: p, bit }));
        x_vars.push(start..roles.len() as u32);
    }

    let mut layouts = Vec::with_capacity(m + 1);
    for d in 0..=m {
        let mut blocks = Vec::new();
        for (side, position) in disjunct_blocks(d, m) {
            let circuit = if side == Side::U { u.clone() } else { v.clone() };
            let ws = roles.len() as u32;
            roles.extend((0..wl).map(|bit| VarRole::WitnessBit { disjunct: d, side, position, bit }));
            let we = roles.len() as u32;
            roles.extend((0..circuit.gates().len() as u32).map(|index| VarRole::TseitinAux {
                disjunct: d,
                side,
                position,
                index,
            }));
            let ae = roles.len() as u32;
            blocks.push(Block { side, position, witness_vars: ws..we, aux_vars: we..ae, circuit });
        }
        layouts.push(blocks);
    }

    let roles: Arc<[VarRole]> = roles.into();
    let num_vars = roles.len() as u32;
    let disjuncts = layouts
        .into_iter()
        .enumerate()
        .map(|(d, blocks)| {
            let mut clauses = Vec::new();
            for b in &blocks {
                let xs: Vec<u32> = x_vars[b.position - 1].clone().collect();
                let ws: Vec<u32> = b.witness_vars.clone().collect();
                let at = Placement { x_vars: &xs, w_vars: &ws, aux_start: b.aux_vars.start };
                tseitin_into(&b.circuit, Polarity::Negated, &at, &mut clauses);
            }
            Disjunct { index: d, blocks, cnf: CnfFormula { num_vars, clauses, var_roles: roles.clone() } }
        })
        .collect();

    Ok(DisjunctionInstance {
        m,
        n,
        witness_len: wl,
        pair_id: pair.pair_id().to_owned(),
        x_vars,
        disjuncts,
        num_vars,
        roles,
    })
}

impl DisjunctionInstance {
    pub fn disjunct(&self, d: usize) -> Option<&Disjunct> {
        self.disjuncts.iter().find(|dj| dj.index == d)
    }

    /// Copy with disjunct `d` deleted; used to build broken fixtures.
    pub fn without_disjunct(&self, d: usize) -> Self {
        let mut out = self.clone();
        out.disjuncts.retain(|dj| dj.index != d);
        out
    }

    /// Truth value of disjunct `d` under the x-tuple and one witness per block,
    /// with aux variables completed canonically.
    pub fn eval_disjunct(&self, d: usize, x_assign: &[BitString], w_assign: &[Witness]) -> Result<bool, EncodingError> {
        let dj = self.disjunct(d).ok_or(EncodingError::NoSuchDisjunct(d))?;
        if x_assign.len() != self.m || x_assign.iter().any(|x| x.len() != self.n as usize) {
            return Err(EncodingError::Dimension(format!("expected {} strings of {} bits", self.m, self.n)));
        }
        if w_assign.len() != dj.blocks.len() || w_assign.iter().any(|w| w.0.len() != self.witness_len as usize) {
            return Err(EncodingError::Dimension(format!(
                "disjunct {d} needs {} witnesses of {} bits",
                dj.blocks.len(),
                self.witness_len
            )));
        }
        let mut a = vec![false; self.num_vars as usize];
        for (p, x) in x_assign.iter().enumerate() {
            for (bit, var) in self.x_vars[p].clone().enumerate() {
                a[var as usize] = x.bit(bit);
            }
        }
        for (b, w) in dj.blocks.iter().zip(w_assign) {
            for (bit, var) in b.witness_vars.clone().enumerate() {
                a[var as usize] = w.0.bit(bit);
            }
            let aux = b.circuit.eval_gates(x_assign[b.position - 1], w.0);
            for (val, var) in aux.into_iter().zip(b.aux_vars.clone()) {
                a[var as usize] = val;
            }
        }
        Ok(dj.cnf.eval(&a))
    }

    /// log2 of the work an exhaustive check performs: one table per disjunct
    /// over the strings and witnesses it reads, then one lookup pass over
    /// every x-tuple.
    pub fn validity_cost_log2(&self) -> f64 {
        let per_block = (self.n + self.witness_len) as i32;
        let tables: f64 = self.disjuncts.iter().map(|dj| 2f64.powi(per_block * dj.blocks.len() as i32)).sum();
        (tables + 2f64.powi(self.n as i32 * self.m as i32)).log2()
    }

    /// Exhaustive semantic validity: for every x-tuple some disjunct is true
    /// under every witness assignment. Returns the lexicographically first
    /// falsifying x-tuple (x_1 most significant) otherwise.
    pub fn check_validity(&self) -> Result<Validity, EncodingError> {
        let cost = self.validity_cost_log2();
        if cost > VALIDITY_BUDGET_LOG2 {
            return Err(EncodingError::TooLarge { log2_cost: cost });
        }
        let n = self.n as usize;
        let wl = self.witness_len as usize;
        let m = self.m;

        // Per disjunct: smallest falsifying witness vector, for every value of
        // the x-strings the disjunct reads.
        let tables: Vec<FalsifierTable> = self
            .disjuncts
            .iter()
            .map(|dj| -> Result<_, EncodingError> {
                let positions: Vec<usize> = dj.blocks.iter().map(|b| b.position).collect();
                let k = positions.len();
                let entries = (0..1u64 << (n * k))
                    .into_par_iter()
                    .map(|key| -> Result<Option<Vec<Witness>>, EncodingError> {
                        let mut xs = vec![BitString::zeros(self.n); m];
                        for (j, &p) in positions.iter().enumerate() {
                            let v = (key >> (n * (k - 1 - j))) & ((1 << n) - 1);
                            xs[p - 1] = BitString::from_raw(v as u32, self.n);
                        }
                        for c in 0..1u64 << (wl * k) {
                            let ws: Vec<Witness> = (0..k)
                                .map(|j| {
                                    let v = (c >> (wl * (k - 1 - j))) & ((1 << wl) - 1);
                                    Witness(BitString::from_raw(v as u32, self.witness_len))
                                })
                                .collect();
                            if !self.eval_disjunct(dj.index, &xs, &ws)? {
                                return Ok(Some(ws));
                            }
                        }
                        Ok(None)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((positions, entries))
            })
            .collect::<Result<_, _>>()?;

        let key_of = |t: u64, positions: &[usize]| -> usize {
            let k = positions.len();
            positions.iter().enumerate().fold(0usize, |acc, (j, &p)| {
                let v = (t >> (n * (m - p))) & ((1 << n) - 1);
                acc | ((v as usize) << (n * (k - 1 - j)))
            })
        };

        let hit = (0..1u64 << (n * m))
            .into_par_iter()
            .find_first(|&t| tables.iter().all(|(positions, entries)| entries[key_of(t, positions)].is_some()));

        Ok(match hit {
            None => Validity::Valid,
            Some(t) => {
                let x = (1..=m)
                    .map(|p| BitString::from_raw(((t >> (n * (m - p))) & ((1 << n) - 1)) as u32, self.n))
                    .collect();
                let witnesses = self
                    .disjuncts
                    .iter()
                    .zip(&tables)
                    .map(|(dj, (positions, entries))| {
                        (dj.index, entries[key_of(t, positions)].clone().expect("falsified"))
                    })
                    .collect();
                Validity::Invalid(Falsifier { x, witnesses })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::np_pair::make_easy_pair;

    #[test]
    fn block_structure_follows_the_chain() {
        assert_eq!(disjunct_blocks(0, 2), vec![(Side::U, 1)]);
        assert_eq!(disjunct_blocks(1, 2), vec![(Side::V, 1), (Side::U, 2)]);
        assert_eq!(disjunct_blocks(2, 2), vec![(Side::V, 2)]);
    }

    #[test]
    fn smallest_chain_has_three_disjuncts() {
        let inst = build_disjunction(&make_easy_pair(3).unwrap(), 2).unwrap();
        assert_eq!(inst.disjuncts.len(), 3);
        for dj in &inst.disjuncts {
            dj.cnf.check().unwrap();
        }
    }

    #[test]
    fn rejects_short_chain() {
        let e = build_disjunction(&make_easy_pair(3).unwrap(), 1).unwrap_err();
        assert_eq!(e, EncodingError::ChainTooShort(1));
    }

    #[test]
    fn dimension_errors() {
        let inst = build_disjunction(&make_easy_pair(3).unwrap(), 2).unwrap();
        let x = BitString::zeros(3);
        assert!(inst.eval_disjunct(0, &[x], &[Witness(x)]).is_err());
        assert!(inst.eval_disjunct(1, &[x, x], &[Witness(x)]).is_err());
        assert!(inst.eval_disjunct(5, &[x, x], &[Witness(x)]).is_err());
    }
}
