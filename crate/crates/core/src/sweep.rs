//! Numeric experiments over families of programs.

use std::fmt;
use std::time::{Duration, Instant};

use crate::closure::compute_closure;
use crate::combin::b1_length;
use crate::error::Result;
use crate::lang::threshold;
use crate::lp::{build_reduced_weak_primal_b_n1, build_relaxed_binomial, build_weak_primal, LinearProgram};
use crate::rational::Rational;
use crate::regex::build_ellul_bnk;
use crate::solver::{solve_with, SolverOptions, Status};

/// How the optimum must relate to the reference value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Equal,
    AtMost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub status: Status,
    pub optimum: Option<Rational>,
    pub reference: Rational,
    pub expect: Expect,
    pub elapsed: Duration,
}

impl SweepRow {
    pub fn holds(&self) -> bool {
        match (&self.optimum, self.expect) {
            (Some(v), Expect::Equal) => *v == self.reference,
            (Some(v), Expect::AtMost) => *v <= self.reference,
            (None, _) => false,
        }
    }
}

impl fmt::Display for SweepRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = match &self.optimum {
            Some(v) => format!("{v} ({})", v.to_decimal(4)),
            None => self.status.to_string(),
        };
        let rel = match self.expect {
            Expect::Equal => "=",
            Expect::AtMost => "<=",
        };
        let verdict = if self.holds() { "yes" } else { "NO" };
        write!(f, "{:>3} {:>2}  {opt:<24} {rel} {:<6} {verdict:<4} {:.3}s", self.n, self.k, self.reference.to_string(), self.elapsed.as_secs_f64())
    }
}

pub const SWEEP_HEADER: &str = "  n  k  optimum                  ref      holds time";

fn row(n: usize, k: usize, lp: Result<LinearProgram>, reference: u64, expect: Expect, opts: &SolverOptions) -> Result<SweepRow> {
    let start = Instant::now();
    let lp = lp?;
    let r = solve_with(&lp, opts);
    Ok(SweepRow {
        n,
        k,
        status: r.status,
        optimum: r.objective.filter(|_| r.status == Status::Optimal),
        reference: Rational::from_integer(reference as i64),
        expect,
        elapsed: start.elapsed(),
    })
}

/// Optimum of the reduced weak program of `B(n,1)` against `⌈n log₂ 2n⌉`.
pub fn b1_conjecture(ns: impl IntoIterator<Item = usize>, opts: &SolverOptions) -> Result<Vec<SweepRow>> {
    ns.into_iter().map(|n| row(n, 1, build_reduced_weak_primal_b_n1(n), b1_length(n), Expect::Equal, opts)).collect()
}

/// Optimum of the relaxed program `(n,k)` against `|R_{n,k}|`.
pub fn bnk_conjecture(pairs: impl IntoIterator<Item = (usize, usize)>, opts: &SolverOptions) -> Result<Vec<SweepRow>> {
    pairs
        .into_iter()
        .map(|(n, k)| {
            let len = if k <= n { build_ellul_bnk(n, k).length() as u64 } else { 0 };
            row(n, k, build_relaxed_binomial(n, k), len, Expect::Equal, opts)
        })
        .collect()
}

/// Weak program of `T(n,1)` over its full closure against `4n`.
pub fn caveat(ns: impl IntoIterator<Item = usize>, closure_cap: usize, opts: &SolverOptions) -> Result<Vec<SweepRow>> {
    ns.into_iter()
        .map(|n| {
            let l = threshold(n, 1);
            let lp = compute_closure(&l, closure_cap).and_then(|c| build_weak_primal(&l, &c));
            row(n, 1, lp, 4 * n as u64, Expect::AtMost, opts)
        })
        .collect()
}

/// All `(n, k)` with `1 ≤ n ≤ nmax` and `k ≤ min(n, kmax)`.
pub fn grid(nmax: usize, kmax: usize) -> Vec<(usize, usize)> {
    (1..=nmax).flat_map(|n| (0..=kmax.min(n)).map(move |k| (n, k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps_hold() {
        let opts = SolverOptions::default();
        let rows = b1_conjecture(1..=5, &opts).unwrap();
        assert!(rows.iter().all(SweepRow::holds), "{rows:?}");
        assert_eq!(rows[3].optimum, Some(Rational::from_integer(12)));
        let rows = bnk_conjecture([(4, 2), (5, 1), (3, 0)], &opts).unwrap();
        assert!(rows.iter().all(SweepRow::holds), "{rows:?}");
        let rows = caveat([2], 100_000, &opts).unwrap();
        assert!(rows[0].holds());
        assert_eq!(grid(2, 1), vec![(1, 0), (1, 1), (2, 0), (2, 1)]);
    }

    #[test]
    fn resource_rows_fail() {
        let opts = SolverOptions { max_iterations: 0, ..SolverOptions::default() };
        let rows = b1_conjecture([6], &opts).unwrap();
        assert_eq!(rows[0].status, Status::Resource);
        assert!(!rows[0].holds());
        assert!(rows[0].to_string().contains("resource"));
    }
}
