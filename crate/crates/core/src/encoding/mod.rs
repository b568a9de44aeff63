//! Propositional side: verifier circuits, Tseitin CNF, the induction
//! disjunction and its exhaustive validity check, DIMACS export.

pub mod circuit;
pub mod cnf;
pub mod dimacs;
pub mod disjunction;

use thiserror::Error;

use crate::np_pair::PairError;

pub use circuit::{verifier_circuit, Circuit, CircuitBuilder, Gate, Operand, Signal};
pub use cnf::{canonical_assignment, tseitin, tseitin_labelled, CnfFormula, Lit, Polarity, VarRole};
pub use dimacs::{export_dimacs, read_dimacs, write_dimacs, Manifest};
pub use disjunction::{build_disjunction, disjunct_blocks, DisjunctionInstance, Falsifier, Validity};

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("table-backed verifier circuits are limited to n <= 10, got n = {0}")]
    TableTooLarge(u8),
    #[error("the induction chain needs m >= 2, got m = {0}")]
    ChainTooShort(usize),
    #[error("exhaustive check would need 2^{log2_cost:.1} evaluations (limit 2^24)")]
    TooLarge { log2_cost: f64 },
    #[error("no disjunct with index {0}")]
    NoSuchDisjunct(usize),
    #[error("assignment shape mismatch: {0}")]
    Dimension(String),
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("DIMACS parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Pair(#[from] PairError),
}
