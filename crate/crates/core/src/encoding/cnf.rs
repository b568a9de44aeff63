//! CNF formulas and the Tseitin translation.

use std::sync::Arc;

use serde::Serialize;

use crate::bits::{BitString, Side};

use super::circuit::{Circuit, Gate, Operand};

/// A literal over a 0-based variable id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lit {
    pub var: u32,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: u32) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: u32) -> Self {
        Self { var, positive: false }
    }

    pub fn negate(self) -> Self {
        Self { var: self.var, positive: !self.positive }
    }

    /// 1-based signed DIMACS literal.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(lit: i64) -> Option<Self> {
        if lit == 0 {
            return None;
        }
        let var = (lit.unsigned_abs() - 1) as u32;
        Some(Self { var, positive: lit > 0 })
    }

    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var as usize] == self.positive
    }
}

/// What a variable stands for. Positions are 1-based; witness and aux
/// variables are owned by one verifier block `(side, position)` of one disjunct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "role", rename_all = "kebab-case")]
pub enum VarRole {
    XBit { position: usize, bit: u8 },
    WitnessBit { disjunct: usize, side: Side, position: usize, bit: u8 },
    TseitinAux { disjunct: usize, side: Side, position: usize, index: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    pub var_roles: Arc<[VarRole]>,
}

impl CnfFormula {
    /// True iff every clause has a true literal.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// Checks the structural invariants: nonempty clauses of width at most 3,
    /// in-range variables, a role for every variable.
    pub fn check(&self) -> Result<(), String> {
        if self.var_roles.len() != self.num_vars as usize {
            return Err(format!("{} roles for {} variables", self.var_roles.len(), self.num_vars));
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if c.is_empty() || c.len() > 3 {
                return Err(format!("clause {i} has width {}", c.len()));
            }
            if let Some(l) = c.iter().find(|l| l.var >= self.num_vars) {
                return Err(format!("clause {i} mentions variable {} >= {}", l.var, self.num_vars));
            }
        }
        Ok(())
    }
}

/// Whether the encoded output is asserted true or false.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    AsIs,
    Negated,
}

/// Where a circuit's inputs and gates live in a larger variable space.
#[derive(Clone, Debug)]
pub(crate) struct Placement<'a> {
    pub x_vars: &'a [u32],
    pub w_vars: &'a [u32],
    pub aux_start: u32,
}

/// Appends the Tseitin clauses of `c` placed at `at`; gate `g` gets variable
/// `aux_start + g`. Returns the number of clauses that define gates (the
/// output unit clause comes last).
pub(crate) fn tseitin_into(c: &Circuit, polarity: Polarity, at: &Placement<'_>, clauses: &mut Vec<Vec<Lit>>) -> usize {
    let var_of = |op: Operand| match op {
        Operand::X(i) => at.x_vars[i as usize],
        Operand::W(i) => at.w_vars[i as usize],
        Operand::Gate(g) => at.aux_start + g,
    };
    let before = clauses.len();
    for (g, gate) in c.gates().iter().enumerate() {
        let out = at.aux_start + g as u32;
        match *gate {
            Gate::And(a, b) => {
                let (a, b) = (var_of(a), var_of(b));
                clauses.push(vec![Lit::neg(out), Lit::pos(a)]);
                clauses.push(vec![Lit::neg(out), Lit::pos(b)]);
                clauses.push(vec![Lit::pos(out), Lit::neg(a), Lit::neg(b)]);
            }
            Gate::Or(a, b) => {
                let (a, b) = (var_of(a), var_of(b));
                clauses.push(vec![Lit::pos(out), Lit::neg(a)]);
                clauses.push(vec![Lit::pos(out), Lit::neg(b)]);
                clauses.push(vec![Lit::neg(out), Lit::pos(a), Lit::pos(b)]);
            }
            Gate::Not(a) => {
                let a = var_of(a);
                clauses.push(vec![Lit::pos(out), Lit::pos(a)]);
                clauses.push(vec![Lit::neg(out), Lit::neg(a)]);
            }
            Gate::Const(v) => clauses.push(vec![Lit { var: out, positive: v }]),
        }
    }
    let defining = clauses.len() - before;
    let out = Lit::pos(var_of(c.output()));
    clauses.push(vec![match polarity {
        Polarity::AsIs => out,
        Polarity::Negated => out.negate(),
    }]);
    defining
}

/// Standalone Tseitin CNF of a circuit.
///
/// Layout: x-bits first, then witness bits, then one aux variable per gate.
/// Roles are those of disjunct 0's block at position 1 with the given side
/// label (the circuit itself does not know which verifier it is).
pub fn tseitin(c: &Circuit, polarity: Polarity) -> CnfFormula {
    tseitin_labelled(c, polarity, Side::U)
}

pub fn tseitin_labelled(c: &Circuit, polarity: Polarity, side: Side) -> CnfFormula {
    let nx = c.x_len() as u32;
    let nw = c.w_len() as u32;
    let x_vars: Vec<u32> = (0..nx).collect();
    let w_vars: Vec<u32> = (nx..nx + nw).collect();
    let aux_start = nx + nw;
    let mut clauses = Vec::new();
    tseitin_into(c, polarity, &Placement { x_vars: &x_vars, w_vars: &w_vars, aux_start }, &mut clauses);
    let mut roles = Vec::new();
    roles.extend((0..nx).map(|b| VarRole::XBit { position: 1, bit: b as u8 }));
    roles.extend((0..nw).map(|b| VarRole::WitnessBit { disjunct: 0, side, position: 1, bit: b as u8 }));
    roles.extend((0..c.gates().len() as u32).map(|index| VarRole::TseitinAux {
        disjunct: 0,
        side,
        position: 1,
        index,
    }));
    CnfFormula { num_vars: aux_start + c.gates().len() as u32, clauses, var_roles: roles.into() }
}

/// Full assignment for a standalone Tseitin CNF with canonical aux values.
pub fn canonical_assignment(c: &Circuit, x: BitString, w: BitString) -> Vec<bool> {
    let mut a: Vec<bool> = x.bits().chain(w.bits()).collect();
    a.extend(c.eval_gates(x, w));
    a
}
