//! DIMACS export of the disjunct blocks.
//!
//! Every disjunct becomes its own `disjunct_<d>.cnf` over the *global*
//! variable numbering, so shared x-variables carry the same id in every file.
//! Each file opens with a role header, one comment line for the x-tuples and
//! one per disjunct:
//!
//! ```text
//! c x 1=1+3 2=4+3
//! c d0 U@1:w=7+3:a=10+12
//! c d1 V@1:w=22+3:a=25+12 U@2:w=37+3:a=40+12
//! ```
//!
//! `start+count` ranges are 1-based DIMACS ids. A JSON manifest lists the
//! files and the shared x-variables.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::bits::Side;

use super::cnf::{CnfFormula, Lit, VarRole};
use super::disjunction::DisjunctionInstance;
use super::EncodingError;

pub const MANIFEST_SCHEMA: &str = "kptlab.dimacs-manifest/1";

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ManifestFile {
    pub disjunct: usize,
    pub file: String,
    pub num_clauses: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SharedX {
    pub position: usize,
    /// 1-based DIMACS ids, bit 0 first.
    pub vars: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Manifest {
    pub schema: &'static str,
    pub pair_id: String,
    pub n: u8,
    pub m: usize,
    pub num_vars: u32,
    pub files: Vec<ManifestFile>,
    pub shared_x: Vec<SharedX>,
}

/// Owner of a run of variables in the header.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Owner {
    X,
    Disjunct(usize),
}

/// Role header lines (without the leading `c `).
pub fn role_header(roles: &[VarRole]) -> Vec<String> {
    let mut lines: BTreeMap<Owner, Vec<String>> = BTreeMap::new();
    let mut i = 0usize;
    while i < roles.len() {
        match roles[i] {
            VarRole::XBit { position, .. } => {
                let start = i;
                while i < roles.len() && matches!(roles[i], VarRole::XBit { position: p, .. } if p == position) {
                    i += 1;
                }
                lines.entry(Owner::X).or_default().push(format!("{position}={}+{}", start + 1, i - start));
            }
            VarRole::WitnessBit { disjunct, side, position, .. } => {
                let ws = i;
                while i < roles.len()
                    && matches!(roles[i], VarRole::WitnessBit { disjunct: d, side: s, position: p, .. }
                        if d == disjunct && s == side && p == position)
                {
                    i += 1;
                }
                let as_ = i;
                while i < roles.len()
                    && matches!(roles[i], VarRole::TseitinAux { disjunct: d, side: s, position: p, .. }
                        if d == disjunct && s == side && p == position)
                {
                    i += 1;
                }
                lines.entry(Owner::Disjunct(disjunct)).or_default().push(format!(
                    "{side}@{position}:w={}+{}:a={}+{}",
                    ws + 1,
                    as_ - ws,
                    as_ + 1,
                    i - as_
                ));
            }
            VarRole::TseitinAux { disjunct, side, position, .. } => {
                // Circuits without witness inputs have aux runs right after x.
                let as_ = i;
                while i < roles.len()
                    && matches!(roles[i], VarRole::TseitinAux { disjunct: d, side: s, position: p, .. }
                        if d == disjunct && s == side && p == position)
                {
                    i += 1;
                }
                lines.entry(Owner::Disjunct(disjunct)).or_default().push(format!(
                    "{side}@{position}:w={}+0:a={}+{}",
                    as_ + 1,
                    as_ + 1,
                    i - as_
                ));
            }
        }
    }
    lines
        .into_iter()
        .map(|(owner, runs)| match owner {
            Owner::X => format!("x {}", runs.join(" ")),
            Owner::Disjunct(d) => format!("d{d} {}", runs.join(" ")),
        })
        .collect()
}

pub fn write_dimacs<W: Write>(cnf: &CnfFormula, out: &mut W) -> std::io::Result<()> {
    for line in role_header(&cnf.var_roles) {
        writeln!(out, "c {line}")?;
    }
    writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len())?;
    for clause in &cnf.clauses {
        for lit in clause {
            write!(out, "{} ", lit.to_dimacs())?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}

fn is_role_line(body: &str) -> bool {
    match body.split_whitespace().next() {
        Some("x") => true,
        Some(h) => h.strip_prefix('d').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())),
        None => false,
    }
}

fn parse_range(s: &str) -> Option<(u32, u32)> {
    let (a, b) = s.split_once('+')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

fn parse_header_line(body: &str, roles: &mut BTreeMap<u32, VarRole>) -> Result<(), String> {
    let mut tokens = body.split_whitespace();
    let head = tokens.next().ok_or("empty header line")?;
    if head == "x" {
        for tok in tokens {
            let (p, r) = tok.split_once('=').ok_or_else(|| format!("bad x run {tok:?}"))?;
            let position: usize = p.parse().map_err(|_| format!("bad position {p:?}"))?;
            let (start, count) = parse_range(r).ok_or_else(|| format!("bad range {r:?}"))?;
            for bit in 0..count {
                roles.insert(start - 1 + bit, VarRole::XBit { position, bit: bit as u8 });
            }
        }
        return Ok(());
    }
    let disjunct: usize =
        head.strip_prefix('d').and_then(|d| d.parse().ok()).ok_or_else(|| format!("unknown header {head:?}"))?;
    for tok in tokens {
        let mut parts = tok.split(':');
        let label = parts.next().ok_or("missing block label")?;
        let (side, pos) = label.split_once('@').ok_or_else(|| format!("bad block {label:?}"))?;
        let side = match side {
            "U" => Side::U,
            "V" => Side::V,
            _ => return Err(format!("bad side {side:?}")),
        };
        let position: usize = pos.parse().map_err(|_| format!("bad position {pos:?}"))?;
        for part in parts {
            let (kind, r) = part.split_once('=').ok_or_else(|| format!("bad run {part:?}"))?;
            let (start, count) = parse_range(r).ok_or_else(|| format!("bad range {r:?}"))?;
            for k in 0..count {
                let role = match kind {
                    "w" => VarRole::WitnessBit { disjunct, side, position, bit: k as u8 },
                    "a" => VarRole::TseitinAux { disjunct, side, position, index: k },
                    _ => return Err(format!("bad run kind {kind:?}")),
                };
                roles.insert(start - 1 + k, role);
            }
        }
    }
    Ok(())
}

/// Reads a file written by [`write_dimacs`]; the role header is required.
pub fn read_dimacs<R: BufRead>(input: R) -> Result<CnfFormula, EncodingError> {
    let mut roles = BTreeMap::new();
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| EncodingError::Io(e.to_string()))?;
        let perr = |msg: String| EncodingError::Parse { line: lineno + 1, msg };
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(body) = t.strip_prefix('c') {
            let body = body.trim();
            if is_role_line(body) {
                parse_header_line(body, &mut roles).map_err(perr)?;
            }
            continue;
        }
        if let Some(rest) = t.strip_prefix("p cnf") {
            let nums: Vec<&str> = rest.split_whitespace().collect();
            if nums.len() != 2 {
                return Err(perr("malformed problem line".into()));
            }
            let v = nums[0].parse().map_err(|_| perr("bad variable count".into()))?;
            let c = nums[1].parse().map_err(|_| perr("bad clause count".into()))?;
            header = Some((v, c));
            continue;
        }
        if header.is_none() {
            return Err(perr("clause before problem line".into()));
        }
        for tok in t.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| perr(format!("bad literal {tok:?}")))?;
            match Lit::from_dimacs(lit) {
                Some(l) => current.push(l),
                None => clauses.push(std::mem::take(&mut current)),
            }
        }
    }
    let (num_vars, num_clauses) = header.ok_or(EncodingError::Parse { line: 0, msg: "missing problem line".into() })?;
    if !current.is_empty() {
        return Err(EncodingError::Parse { line: 0, msg: "unterminated clause".into() });
    }
    if clauses.len() != num_clauses {
        return Err(EncodingError::Parse {
            line: 0,
            msg: format!("header declares {num_clauses} clauses, found {}", clauses.len()),
        });
    }
    if roles.len() != num_vars as usize || roles.keys().next_back().is_some_and(|&k| k >= num_vars) {
        return Err(EncodingError::Parse { line: 0, msg: "role header does not cover every variable".into() });
    }
    let cnf = CnfFormula { num_vars, clauses, var_roles: roles.into_values().collect::<Vec<_>>().into() };
    cnf.check().map_err(|msg| EncodingError::Parse { line: 0, msg })?;
    Ok(cnf)
}

/// Writes one DIMACS file per disjunct plus `manifest.json` into `dir`.
pub fn export_dimacs(inst: &DisjunctionInstance, dir: &Path) -> Result<Manifest, EncodingError> {
    fs::create_dir_all(dir).map_err(|e| EncodingError::Io(e.to_string()))?;
    let mut files = Vec::new();
    for dj in &inst.disjuncts {
        let name = format!("disjunct_{}.cnf", dj.index);
        let mut buf = Vec::new();
        write_dimacs(&dj.cnf, &mut buf).map_err(|e| EncodingError::Io(e.to_string()))?;
        fs::write(dir.join(&name), buf).map_err(|e| EncodingError::Io(e.to_string()))?;
        files.push(ManifestFile { disjunct: dj.index, file: name, num_clauses: dj.cnf.clauses.len() });
    }
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        pair_id: inst.pair_id.clone(),
        n: inst.n,
        m: inst.m,
        num_vars: inst.num_vars,
        files,
        shared_x: inst
            .x_vars
            .iter()
            .enumerate()
            .map(|(p, r)| SharedX { position: p + 1, vars: r.clone().map(|v| v + 1).collect() })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(dir.join("manifest.json"), json + "\n").map_err(|e| EncodingError::Io(e.to_string()))?;
    Ok(manifest)
}
