//! Test-only oracles shared with the acceptance suite.

use kptlab::encoding::{CnfFormula, Lit};

/// Plain DPLL with unit propagation; the oracle for satisfiability under a
/// partial assignment.
pub fn dpll(clauses: &[Vec<Lit>], assign: &mut [Option<bool>]) -> bool {
    let mut trail = Vec::new();
    let ok = loop {
        let mut changed = false;
        let mut conflict = false;
        for c in clauses {
            let mut unassigned = None;
            let mut free = 0;
            let mut sat = false;
            for l in c {
                match assign[l.var as usize] {
                    Some(v) if v == l.positive => {
                        sat = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        free += 1;
                        unassigned = Some(*l);
                    }
                }
            }
            if sat {
                continue;
            }
            match (free, unassigned) {
                (0, _) => {
                    conflict = true;
                    break;
                }
                (1, Some(l)) => {
                    assign[l.var as usize] = Some(l.positive);
                    trail.push(l.var);
                    changed = true;
                }
                _ => {}
            }
        }
        if conflict {
            break false;
        }
        if !changed {
            break true;
        }
    };
    let result = ok
        && match assign.iter().position(Option::is_none) {
            None => true,
            Some(v) => [false, true].into_iter().any(|b| {
                let mut a = assign.to_vec();
                a[v] = Some(b);
                dpll(clauses, &mut a)
            }),
        };
    for v in trail {
        assign[v as usize] = None;
    }
    result
}

/// Is the formula satisfiable once the leading `inputs.len()` variables are fixed?
pub fn sat_with_inputs(cnf: &CnfFormula, inputs: &[bool]) -> bool {
    let mut assign = vec![None; cnf.num_vars as usize];
    for (i, &b) in inputs.iter().enumerate() {
        assign[i] = Some(b);
    }
    dpll(&cnf.clauses, &mut assign)
}
