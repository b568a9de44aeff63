//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use kptlab::game::{
    ConstantStudent, MsbStudent, OmniscientStudent, ParityAnswer, ParityStudent, RandomStudent, Student,
    TwoRoundStudent, DEFAULT_STEP_BUDGET,
};
use kptlab::reduction::{default_tau, reduce::DELTA, ReduceParams};
use kptlab::stats::hoeffding_samples;
use kptlab::{make_easy_pair, make_overlap_pair, make_perm_pair, NpPair, PermPairConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {value:?} ({why})")]
    BadValue { key: String, value: String, why: String },
    #[error("{0}")]
    Invalid(String),
}

const KEYS: &[&str] = &[
    "pair",
    "n",
    "pair_seed",
    "hard_bit",
    "student",
    "constant",
    "probe",
    "parity_even",
    "parity_odd",
    "k",
    "m",
    "samples",
    "measure_samples",
    "tau",
    "confidence",
    "advice_budget",
    "context_budget",
    "context_samples",
    "step_limit",
    "master_seed",
    "games",
    "drop_disjunct",
    "exact",
    "workers",
    "transcripts",
    "side_lists_dir",
    "dimacs_dir",
];

/// Keys that change where output goes or how fast it is produced, but not
/// what is computed. They are left out of the echo and the hash.
const NON_SEMANTIC: &[&str] = &["workers", "transcripts", "side_lists_dir", "dimacs_dir"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    Perm,
    Easy,
    Overlap,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StudentSpec {
    Omniscient,
    Constant(usize),
    Random,
    TwoRound { probe: usize },
    Parity { even: ParityAnswer, odd: ParityAnswer },
    Msb,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub pair: PairKind,
    pub n: u8,
    pub pair_seed: u64,
    pub hard_bit: u8,
    pub student: StudentSpec,
    pub k: usize,
    pub m: usize,
    pub samples: u64,
    pub measure_samples: u64,
    pub tau: f64,
    pub confidence: f64,
    pub advice_budget: usize,
    pub context_budget: usize,
    pub context_samples: u64,
    pub step_limit: u64,
    pub master_seed: u64,
    pub games: u64,
    pub drop_disjunct: Option<usize>,
    pub exact: bool,
    pub workers: Option<usize>,
    pub transcripts: Option<PathBuf>,
    pub side_lists_dir: Option<PathBuf>,
    pub dimacs_dir: Option<PathBuf>,
    /// Resolved semantic settings, as echoed into reports.
    pub echo: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        out.insert(k.to_owned(), v.to_owned());
    }
    Ok(out)
}

pub fn read_pairs(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
    parse_pairs(&text)
}

struct Raw(BTreeMap<String, String>);

impl Raw {
    fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e: T::Err| ConfigError::BadValue {
                key: key.into(),
                value: v.clone(),
                why: e.to_string(),
            }),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    fn bad(&self, key: &str, why: &str) -> ConfigError {
        ConfigError::BadValue { key: key.into(), value: self.0.get(key).cloned().unwrap_or_default(), why: why.into() }
    }
}

fn parity_answer(raw: &Raw, key: &str, default: ParityAnswer) -> Result<ParityAnswer, ConfigError> {
    match raw.0.get(key).map(String::as_str) {
        None => Ok(default),
        Some("boundary") => Ok(ParityAnswer::Boundary),
        Some(v) => v.parse().map(ParityAnswer::Index).map_err(|_| raw.bad(key, "expected `boundary` or an index")),
    }
}

fn parity_text(a: ParityAnswer) -> String {
    match a {
        ParityAnswer::Boundary => "boundary".into(),
        ParityAnswer::Index(i) => i.to_string(),
    }
}

impl ExperimentConfig {
    /// Resolves raw settings into a validated config. Unset statistics
    /// parameters are derived from `m`, `tau` and the 99% Hoeffding radius.
    pub fn from_pairs(pairs: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let raw = Raw(pairs);
        let pair = match raw.0.get("pair").map(String::as_str).unwrap_or("perm") {
            "perm" => PairKind::Perm,
            "easy" => PairKind::Easy,
            "overlap" => PairKind::Overlap,
            _ => return Err(raw.bad("pair", "expected perm, easy or overlap")),
        };
        let n: u8 = raw.get("n", 10)?;
        let k: usize = raw.get("k", 1)?;
        if k == 0 || k > 8 {
            return Err(raw.bad("k", "expected 1..=8"));
        }
        let m: usize = raw.get("m", 3usize << (k - 1))?;
        if m < 2 {
            return Err(raw.bad("m", "the chain needs m >= 2"));
        }
        let student = match raw.0.get("student").map(String::as_str).unwrap_or("omniscient") {
            "omniscient" => StudentSpec::Omniscient,
            "constant" => StudentSpec::Constant(raw.get("constant", 0)?),
            "random" => StudentSpec::Random,
            "two_round" => StudentSpec::TwoRound { probe: raw.get("probe", 1)? },
            "parity" => StudentSpec::Parity {
                even: parity_answer(&raw, "parity_even", ParityAnswer::Boundary)?,
                odd: parity_answer(&raw, "parity_odd", ParityAnswer::Index(0))?,
            },
            "msb" => StudentSpec::Msb,
            _ => return Err(raw.bad("student", "expected omniscient, constant, random, two_round, parity or msb")),
        };
        let tau: f64 = raw.get("tau", default_tau(m))?;
        if !(tau > 0.0 && tau < 1.0) {
            return Err(raw.bad("tau", "expected 0 < tau < 1"));
        }
        let confidence: f64 = raw.get("confidence", 0.99)?;
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(raw.bad("confidence", "expected 0 < confidence < 1"));
        }
        let cfg = Self {
            pair,
            n,
            pair_seed: raw.get("pair_seed", 42)?,
            hard_bit: raw.get("hard_bit", 0)?,
            student,
            k,
            m,
            samples: raw.get("samples", hoeffding_samples(tau / 2.0, DELTA))?,
            measure_samples: raw.get("measure_samples", 10_000)?,
            tau,
            confidence,
            advice_budget: raw.get("advice_budget", 32)?,
            context_budget: raw.get("context_budget", 8)?,
            context_samples: raw.get("context_samples", hoeffding_samples(tau / 4.0, DELTA))?,
            step_limit: raw.get("step_limit", DEFAULT_STEP_BUDGET)?,
            master_seed: raw.get("master_seed", 0)?,
            games: raw.get("games", 1000)?,
            drop_disjunct: raw.opt("drop_disjunct")?,
            exact: raw.get("exact", false)?,
            workers: raw.opt("workers")?,
            transcripts: raw.opt("transcripts")?,
            side_lists_dir: raw.opt("side_lists_dir")?,
            dimacs_dir: raw.opt("dimacs_dir")?,
            echo: BTreeMap::new(),
        };
        for (key, v) in [
            ("samples", cfg.samples),
            ("measure_samples", cfg.measure_samples),
            ("advice_budget", cfg.advice_budget as u64),
            ("context_budget", cfg.context_budget as u64),
            ("context_samples", cfg.context_samples),
            ("step_limit", cfg.step_limit),
            ("games", cfg.games),
        ] {
            if v == 0 {
                return Err(raw.bad(key, "must be positive"));
            }
        }
        if cfg.workers == Some(0) {
            return Err(raw.bad("workers", "must be positive"));
        }
        Ok(cfg.with_echo())
    }

    fn with_echo(mut self) -> Self {
        let mut e = BTreeMap::new();
        let pair = match self.pair {
            PairKind::Perm => "perm",
            PairKind::Easy => "easy",
            PairKind::Overlap => "overlap",
        };
        e.insert("pair", pair.to_owned());
        e.insert("n", self.n.to_string());
        if self.pair == PairKind::Perm {
            e.insert("pair_seed", self.pair_seed.to_string());
            e.insert("hard_bit", self.hard_bit.to_string());
        }
        let student = match &self.student {
            StudentSpec::Omniscient => "omniscient",
            StudentSpec::Constant(c) => {
                e.insert("constant", c.to_string());
                "constant"
            }
            StudentSpec::Random => "random",
            StudentSpec::TwoRound { probe } => {
                e.insert("probe", probe.to_string());
                "two_round"
            }
            StudentSpec::Parity { even, odd } => {
                e.insert("parity_even", parity_text(*even));
                e.insert("parity_odd", parity_text(*odd));
                "parity"
            }
            StudentSpec::Msb => "msb",
        };
        e.insert("student", student.to_owned());
        e.insert("k", self.k.to_string());
        e.insert("m", self.m.to_string());
        e.insert("samples", self.samples.to_string());
        e.insert("measure_samples", self.measure_samples.to_string());
        e.insert("tau", format!("{:?}", self.tau));
        e.insert("confidence", format!("{:?}", self.confidence));
        e.insert("advice_budget", self.advice_budget.to_string());
        e.insert("context_budget", self.context_budget.to_string());
        e.insert("context_samples", self.context_samples.to_string());
        e.insert("step_limit", self.step_limit.to_string());
        e.insert("master_seed", self.master_seed.to_string());
        e.insert("games", self.games.to_string());
        if let Some(d) = self.drop_disjunct {
            e.insert("drop_disjunct", d.to_string());
        }
        e.insert("exact", self.exact.to_string());
        debug_assert!(e.keys().all(|k| KEYS.contains(k) && !NON_SEMANTIC.contains(k)));
        self.echo = e.into_iter().map(|(k, v)| (k.to_owned(), v)).collect();
        self
    }

    /// SHA-256 over the echoed settings, one `key=value` line each.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.echo {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn build_pair(&self) -> Result<NpPair, ConfigError> {
        let pair = match self.pair {
            PairKind::Perm => {
                let cfg = PermPairConfig { n: self.n, perm_seed: self.pair_seed, hard_bit_index: self.hard_bit };
                make_perm_pair(&cfg)
            }
            PairKind::Easy => make_easy_pair(self.n),
            PairKind::Overlap => make_overlap_pair(self.n),
        };
        pair.map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn build_student(&self, pair: &Arc<NpPair>) -> Arc<dyn Student> {
        match &self.student {
            StudentSpec::Omniscient => Arc::new(OmniscientStudent::new(pair.clone())),
            StudentSpec::Constant(c) => Arc::new(ConstantStudent::new(*c, self.k)),
            StudentSpec::Random => Arc::new(RandomStudent { k: self.k }),
            StudentSpec::TwoRound { probe } => Arc::new(TwoRoundStudent::new(pair.clone(), *probe)),
            StudentSpec::Parity { even, odd } => Arc::new(ParityStudent::new(pair.clone(), *even, *odd, self.k)),
            StudentSpec::Msb => Arc::new(MsbStudent),
        }
    }

    pub fn reduce_params(&self) -> ReduceParams {
        ReduceParams {
            k: self.k,
            m: self.m,
            samples: self.samples,
            tau: self.tau,
            advice_budget: self.advice_budget,
            context_budget: self.context_budget,
            context_samples: self.context_samples,
            step_limit: self.step_limit,
        }
    }
}
