//! Boolean circuits for the pair verifiers.

use std::collections::HashMap;

use crate::bits::{BitString, Side};
use crate::np_pair::NpPair;

use super::EncodingError;

/// Largest `n` for which table-backed verifiers are compiled.
pub const TABLE_CIRCUIT_MAX_N: u8 = 10;

/// A gate input: an x-bit, a witness bit, or an earlier gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    X(u8),
    W(u8),
    Gate(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    And(Operand, Operand),
    Or(Operand, Operand),
    Not(Operand),
    /// Only emitted when a whole circuit folds to a constant.
    Const(bool),
}

/// A topologically ordered circuit over an x-block and a w-block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    x_len: u8,
    w_len: u8,
    gates: Vec<Gate>,
    output: Operand,
}

impl Circuit {
    /// Checks that every operand is an input or an earlier gate.
    pub fn new(x_len: u8, w_len: u8, gates: Vec<Gate>, output: Operand) -> Result<Self, EncodingError> {
        let ok = |op: Operand, limit: usize| match op {
            Operand::X(i) => i < x_len,
            Operand::W(i) => i < w_len,
            Operand::Gate(g) => (g as usize) < limit,
        };
        for (i, gate) in gates.iter().enumerate() {
            let valid = match *gate {
                Gate::And(a, b) | Gate::Or(a, b) => ok(a, i) && ok(b, i),
                Gate::Not(a) => ok(a, i),
                Gate::Const(_) => true,
            };
            if !valid {
                return Err(EncodingError::MalformedCircuit(format!("gate {i} references a later node")));
            }
        }
        if !ok(output, gates.len()) {
            return Err(EncodingError::MalformedCircuit("output out of range".into()));
        }
        Ok(Self { x_len, w_len, gates, output })
    }

    pub fn x_len(&self) -> u8 {
        self.x_len
    }

    pub fn w_len(&self) -> u8 {
        self.w_len
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> Operand {
        self.output
    }

    /// Value of every gate, in order. These are the canonical Tseitin aux values.
    pub fn eval_gates(&self, x: BitString, w: BitString) -> Vec<bool> {
        let mut vals = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let get = |op: Operand, vals: &[bool]| match op {
                Operand::X(i) => x.bit(i as usize),
                Operand::W(i) => w.bit(i as usize),
                Operand::Gate(g) => vals[g as usize],
            };
            let v = match *gate {
                Gate::And(a, b) => get(a, &vals) && get(b, &vals),
                Gate::Or(a, b) => get(a, &vals) || get(b, &vals),
                Gate::Not(a) => !get(a, &vals),
                Gate::Const(c) => c,
            };
            vals.push(v);
        }
        vals
    }

    pub fn eval(&self, x: BitString, w: BitString) -> bool {
        let vals = self.eval_gates(x, w);
        match self.output {
            Operand::X(i) => x.bit(i as usize),
            Operand::W(i) => w.bit(i as usize),
            Operand::Gate(g) => vals[g as usize],
        }
    }
}

/// A folded signal: either a known constant or a live operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Const(bool),
    Op(Operand),
}

/// Circuit builder with constant folding and shared negations.
pub struct CircuitBuilder {
    x_len: u8,
    w_len: u8,
    gates: Vec<Gate>,
    negations: HashMap<Operand, Operand>,
}

impl CircuitBuilder {
    pub fn new(x_len: u8, w_len: u8) -> Self {
        Self { x_len, w_len, gates: Vec::new(), negations: HashMap::new() }
    }

    fn push(&mut self, gate: Gate) -> Operand {
        self.gates.push(gate);
        Operand::Gate(self.gates.len() as u32 - 1)
    }

    pub fn x(&self, i: u8) -> Signal {
        Signal::Op(Operand::X(i))
    }

    pub fn w(&self, i: u8) -> Signal {
        Signal::Op(Operand::W(i))
    }

    pub fn not(&mut self, a: Signal) -> Signal {
        match a {
            Signal::Const(c) => Signal::Const(!c),
            Signal::Op(op) => {
                if let Some(&n) = self.negations.get(&op) {
                    return Signal::Op(n);
                }
                let n = self.push(Gate::Not(op));
                self.negations.insert(op, n);
                self.negations.insert(n, op);
                Signal::Op(n)
            }
        }
    }

    pub fn and(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::Const(false), _) | (_, Signal::Const(false)) => Signal::Const(false),
            (Signal::Const(true), s) | (s, Signal::Const(true)) => s,
            (Signal::Op(p), Signal::Op(q)) if p == q => a,
            (Signal::Op(p), Signal::Op(q)) => Signal::Op(self.push(Gate::And(p, q))),
        }
    }

    pub fn or(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::Const(true), _) | (_, Signal::Const(true)) => Signal::Const(true),
            (Signal::Const(false), s) | (s, Signal::Const(false)) => s,
            (Signal::Op(p), Signal::Op(q)) if p == q => a,
            (Signal::Op(p), Signal::Op(q)) => Signal::Op(self.push(Gate::Or(p, q))),
        }
    }

    /// `sel ? hi : lo`
    pub fn mux(&mut self, sel: Signal, lo: Signal, hi: Signal) -> Signal {
        if lo == hi {
            return lo;
        }
        let high = self.and(sel, hi);
        let low = if lo == Signal::Const(false) {
            lo
        } else {
            let nsel = self.not(sel);
            self.and(nsel, lo)
        };
        self.or(low, high)
    }

    pub fn xnor(&mut self, a: Signal, b: Signal) -> Signal {
        let both = self.and(a, b);
        let na = self.not(a);
        let nb = self.not(b);
        let neither = self.and(na, nb);
        self.or(both, neither)
    }

    pub fn all(&mut self, signals: impl IntoIterator<Item = Signal>) -> Signal {
        signals.into_iter().fold(Signal::Const(true), |acc, s| self.and(acc, s))
    }

    pub fn finish(mut self, out: Signal) -> Circuit {
        let output = match out {
            Signal::Op(op) => op,
            Signal::Const(c) => self.push(Gate::Const(c)),
        };
        Circuit { x_len: self.x_len, w_len: self.w_len, gates: self.gates, output }
    }
}

/// Circuit computing `verify(side, x, w)` exactly.
///
/// Permutation pairs compile `π(w) = x` as one multiplexer tree per output
/// bit over the witness bits, which limits them to `n <= 10`.
pub fn verifier_circuit(pair: &NpPair, side: Side) -> Result<Circuit, EncodingError> {
    let n = pair.n();
    let wl = pair.witness_len();
    let mut b = CircuitBuilder::new(n, wl);

    let out = if let Some(table) = pair.permutation() {
        if n > TABLE_CIRCUIT_MAX_N {
            return Err(EncodingError::TableTooLarge(n));
        }
        let hard_bit = pair.hard_bit().expect("permutation pairs carry a hard bit");
        let mut eqs = Vec::with_capacity(n as usize);
        for j in 0..n {
            let f = mux_tree(&mut b, table, j, n as i32 - 1, 0);
            let xj = b.x(j);
            eqs.push(b.xnor(xj, f));
        }
        let hb = b.w(hard_bit);
        let hb = if side == Side::U { hb } else { b.not(hb) };
        eqs.push(hb);
        b.all(eqs)
    } else {
        let eqs: Vec<Signal> = (0..n)
            .map(|j| {
                let (x, w) = (b.x(j), b.w(j));
                b.xnor(x, w)
            })
            .collect();
        let eq = b.all(eqs);
        let msb = b.x(n - 1);
        let guard = match side {
            Side::U => msb,
            Side::V if pair.is_overlap() => {
                let nmsb = b.not(msb);
                let x0 = b.x(0);
                let nlsb = b.not(x0);
                b.or(nmsb, nlsb)
            }
            Side::V => b.not(msb),
        };
        b.and(guard, eq)
    };
    Ok(b.finish(out))
}

/// Shannon expansion of output bit `j` of the table over witness bits `bit..=0`,
/// with higher witness bits fixed to `base`.
fn mux_tree(b: &mut CircuitBuilder, table: &[u32], j: u8, bit: i32, base: u32) -> Signal {
    if bit < 0 {
        return Signal::Const((table[base as usize] >> j) & 1 == 1);
    }
    let lo = mux_tree(b, table, j, bit - 1, base);
    let hi = mux_tree(b, table, j, bit - 1, base | (1 << bit));
    let sel = b.w(bit as u8);
    b.mux(sel, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Witness;
    use crate::np_pair::{make_easy_pair, make_perm_pair, PermPairConfig};

    #[test]
    fn identity_perm_circuit_accepts_matching_seed() {
        let pair = NpPair::perm_from_table(3, (0..8).collect(), 0).unwrap();
        let c = verifier_circuit(&pair, Side::U).unwrap();
        let x = BitString::from_bin("101").unwrap();
        assert!(c.eval(x, x));
    }

    #[test]
    fn easy_circuit_matches_definition() {
        let pair = make_easy_pair(3).unwrap();
        for side in [Side::U, Side::V] {
            let c = verifier_circuit(&pair, side).unwrap();
            for x in BitString::all(3) {
                for w in BitString::all(3) {
                    assert_eq!(c.eval(x, w), pair.verify(side, x, Witness(w)));
                }
            }
        }
    }

    #[test]
    fn refuses_large_tables() {
        let pair = make_perm_pair(&PermPairConfig::new(11, 1)).unwrap();
        assert_eq!(verifier_circuit(&pair, Side::U).unwrap_err(), EncodingError::TableTooLarge(11));
    }

    #[test]
    fn rejects_forward_references() {
        let gates = vec![Gate::Not(Operand::Gate(1)), Gate::Not(Operand::X(0))];
        assert!(Circuit::new(1, 0, gates, Operand::Gate(1)).is_err());
    }

    #[test]
    fn folding_removes_trivial_gates() {
        let mut b = CircuitBuilder::new(1, 0);
        let x = b.x(0);
        let t = b.and(x, Signal::Const(true));
        assert_eq!(t, x);
        let nx = b.not(x);
        assert_eq!(b.not(nx), x);
        assert_eq!(b.mux(x, Signal::Const(false), Signal::Const(false)), Signal::Const(false));
    }
}
