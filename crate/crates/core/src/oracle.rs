//! Exhaustive optimal regular expressions for small languages.

use std::collections::HashMap;

use crate::closure::{compute_closure, factorizations, DEFAULT_CLOSURE_CAP};
use crate::error::{Error, Result};
use crate::lang::{LangKey, Language};
use crate::lp::{build_strong_primal, build_weak_primal};
use crate::rational::Rational;
use crate::regex::Regex;
use crate::solver::{solve, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_members: usize,
    pub max_len: usize,
    /// Restrict unions to disjoint splits. Only useful as a comparison.
    pub partitions_only: bool,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { max_members: 8, max_len: 8, partitions_only: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub length: usize,
    pub witness: Regex,
    pub explored: usize,
}

#[derive(Debug, Clone)]
enum Choice {
    Term,
    Concat(Language, Language),
    Union(Language, Language),
}

/// Memo table over languages; reuse one across calls on related inputs.
#[derive(Debug, Default)]
pub struct Oracle {
    caps: OracleCaps,
    memo: HashMap<LangKey, (usize, Choice)>,
}

impl Oracle {
    pub fn new(caps: OracleCaps) -> Self {
        Oracle { caps, memo: HashMap::new() }
    }

    pub fn explored(&self) -> usize {
        self.memo.len()
    }

    pub fn optimal_regex(&mut self, l: &Language) -> Result<OracleResult> {
        if l.len() > self.caps.max_members {
            return Err(Error::CapExceeded { what: "oracle members", count: l.len(), cap: self.caps.max_members });
        }
        if l.max_len() > self.caps.max_len {
            return Err(Error::CapExceeded { what: "oracle member length", count: l.max_len(), cap: self.caps.max_len });
        }
        let length = self.opt(l);
        Ok(OracleResult { length, witness: self.witness(l), explored: self.memo.len() })
    }

    fn opt(&mut self, k: &Language) -> usize {
        let key = k.key();
        if let Some((v, _)) = self.memo.get(&key) {
            return *v;
        }
        let entry = if k.is_singleton() {
            (k.members()[0].chars().count(), Choice::Term)
        } else {
            let mut best: Option<(usize, Choice)> = None;
            for (a, b) in factorizations(k) {
                let v = self.opt(&a) + self.opt(&b);
                if better(&best, v, &a, false) {
                    best = Some((v, Choice::Concat(a, b)));
                }
            }
            let n = k.len();
            let full = (1u64 << n) - 1;
            // K1 = a, K2 = (full \ a) ∪ shared with shared ⊆ a.
            for a in 1..full {
                let rest = full & !a;
                let mut shared = if self.caps.partitions_only { 0 } else { a };
                loop {
                    let b = rest | shared;
                    if b != full {
                        let (ka, kb) = (k.subset_by_mask(a).expect("nonempty"), k.subset_by_mask(b).expect("nonempty"));
                        let v = self.opt(&ka) + self.opt(&kb);
                        if better(&best, v, &ka, true) {
                            best = Some((v, Choice::Union(ka, kb)));
                        }
                    }
                    if shared == 0 {
                        break;
                    }
                    shared = (shared - 1) & a;
                }
            }
            best.expect("a language with two members has a proper cover")
        };
        let v = entry.0;
        self.memo.insert(key, entry);
        v
    }

    fn witness(&self, k: &Language) -> Regex {
        match &self.memo[&k.key()].1 {
            Choice::Term => Regex::word(&k.members()[0]),
            Choice::Concat(a, b) => Regex::concat(self.witness(a), self.witness(b)),
            Choice::Union(a, b) => Regex::union(self.witness(a), self.witness(b)),
        }
    }
}

/// Strictly shorter wins; on equal length a concatenation beats a union and
/// a smaller left operand beats a larger one.
fn better(best: &Option<(usize, Choice)>, v: usize, left: &Language, is_union: bool) -> bool {
    match best {
        None => true,
        Some((bv, choice)) => {
            if v != *bv {
                return v < *bv;
            }
            match (choice, is_union) {
                (Choice::Concat(..), true) => false,
                (Choice::Union(..), false) => true,
                (Choice::Concat(l, _), false) | (Choice::Union(l, _), true) => left.key().as_str() < l.key().as_str(),
                (Choice::Term, _) => false,
            }
        }
    }
}

/// Optimal length and a witness for `l` under the default caps.
pub fn optimal_regex(l: &Language) -> Result<OracleResult> {
    Oracle::new(OracleCaps::default()).optimal_regex(l)
}

pub fn optimal_regex_with(l: &Language, caps: OracleCaps) -> Result<OracleResult> {
    Oracle::new(caps).optimal_regex(l)
}

/// Oracle length next to the optima of the strong and weak programs.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub language: Language,
    pub oracle: OracleResult,
    pub strong: Rational,
    pub weak: Rational,
}

impl OracleReport {
    pub fn strong_matches(&self) -> bool {
        self.strong == Rational::from_integer(self.oracle.length as i64)
    }

    pub fn weak_below(&self) -> bool {
        self.weak <= self.strong
    }

    pub fn holds(&self) -> bool {
        self.strong_matches() && self.weak_below()
    }
}

pub fn oracle_vs_lp(l: &Language) -> Result<OracleReport> {
    let oracle = optimal_regex(l)?;
    let closure = compute_closure(l, DEFAULT_CLOSURE_CAP)?;
    let optimum = |lp| {
        let r = solve(&lp);
        match (r.status, r.objective) {
            (Status::Optimal, Some(v)) => Ok(v),
            (Status::Resource, _) => Err(Error::CapExceeded { what: "solver iterations", count: r.float_iterations + r.exact_iterations, cap: r.float_iterations + r.exact_iterations }),
            (s, _) => Err(Error::Format(format!("program for {l} ended {s}"))),
        }
    };
    let strong = optimum(build_strong_primal(l, &closure)?)?;
    let weak = optimum(build_weak_primal(l, &closure)?)?;
    Ok(OracleReport { language: l.clone(), oracle, strong, weak })
}
