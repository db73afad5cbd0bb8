//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relp::certificates::{
    analytic_binomial1_primal, analytic_g, analytic_sigma_primal, calibrate_alphas, certify_relaxed_dual,
    certify_weak_dual, check_relaxed_dual_cert, check_weak_dual_cert, check_weak_dual_sparse, sigma_closure_member,
    threshold_strong_on, verify_sigma_primal,
};
use relp::closure::{binomial_closure_closed_form, compute_closure, sigma_closure_closed_form};
use relp::combin::binom;
use relp::lang::{binomial, sigma_n, threshold};
use relp::lp::{
    build_reduced_weak_primal_b_n1, build_relaxed_binomial, build_relaxed_binomial_dual, build_strong_dual,
    build_strong_primal, build_weak_dual, build_weak_primal, check_feasible, complete_reduced_b_n1, objective,
    transpose, Assignment, LinearProgram, Relation, Sense, Value, VarName,
};
use relp::oracle::optimal_regex;
use relp::regex::{build_ellul_bnk, sigma_power};
use relp::solver::{solve, Status};
use relp::{Alphabet, Language, Rational, Regex};

type Outcome = Result<String, String>;

static SOLVED: AtomicUsize = AtomicUsize::new(0);
static DUALITY_FAILURES: AtomicUsize = AtomicUsize::new(0);

fn q(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn lang(s: &str) -> Language {
    Language::parse(s).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Exact optimum, after checking the primal and dual solutions against the
/// program and its transpose with zero tolerance.
fn optimum(lp: &LinearProgram) -> Result<Rational, String> {
    let r = solve(lp);
    if r.status != Status::Optimal {
        return Err(format!("solver ended {}", r.status));
    }
    SOLVED.fetch_add(1, Ordering::Relaxed);
    let v = r.objective.clone().unwrap();
    let p = check_feasible(lp, r.primal.as_ref().unwrap(), 0.0);
    let d = check_feasible(&transpose(lp), r.dual.as_ref().unwrap(), 0.0);
    let same = p.objective == Value::Exact(v.clone()) && d.objective == Value::Exact(v.clone());
    if !(p.is_feasible() && d.is_feasible() && same) {
        DUALITY_FAILURES.fetch_add(1, Ordering::Relaxed);
        return Err(format!("duality check failed: primal {}, dual {}, objective {v}", p.objective, d.objective));
    }
    Ok(v)
}

/// `⌈n log₂ 2n⌉` as the least `m` with `2^m ≥ (2n)^n`.
fn ceil_n_log_2n(n: usize) -> i64 {
    let target = (2 * n as u128).pow(n as u32);
    (0..128).find(|&m| 1u128 << m >= target).unwrap()
}

fn c1_toy() -> Outcome {
    // max x1 s.t. x1 − x2 ≤ 0, x1 + 2x2 ≤ 3, x ≥ 0.
    let mut lp = LinearProgram::new(Sense::Max);
    let x1 = lp.add_var(VarName::new("x1"), q(0), None).unwrap();
    let x2 = lp.add_var(VarName::new("x2"), q(0), None).unwrap();
    lp.add_row("r1", vec![(x1, q(1)), (x2, q(-1))], Relation::Le, q(0));
    lp.add_row("r2", vec![(x1, q(1)), (x2, q(2))], Relation::Le, q(3));
    lp.set_objective(vec![(x1, q(1))]);
    let v = optimum(&lp)?;
    ensure(v == q(1), || format!("objective {v}"))?;
    let r = solve(&lp);
    let (p, d) = (r.primal.unwrap(), r.dual.unwrap());
    ensure(p.get_exact(&"x1".into()) == Some(q(1)) && p.get_exact(&"x2".into()) == Some(q(1)), || format!("primal {p:?}"))?;
    let (y1, y2) = (d.get_exact(&"r1".into()).unwrap(), d.get_exact(&"r2".into()).unwrap());
    ensure(y1 == Rational::new(2, 3) && y2 == Rational::new(1, 3), || format!("dual ({y1}, {y2})"))?;
    // Both points checked independently of the solver.
    let mut yp = Assignment::exact();
    yp.set_exact("r1".into(), Rational::new(2, 3));
    yp.set_exact("r2".into(), Rational::new(1, 3));
    let dual_rep = check_feasible(&transpose(&lp), &yp, 0.0);
    ensure(dual_rep.is_feasible() && dual_rep.objective == Value::Exact(q(1)), || format!("{dual_rep:?}"))?;
    Ok("objective 1, x = (1,1), y = (2/3,1/3)".into())
}

fn c2_simple() -> Outcome {
    let l = lang("{00,000}");
    let closure = compute_closure(&l, 1000).map_err(|e| e.to_string())?;
    let v = optimum(&build_weak_primal(&l, &closure).unwrap())?;
    ensure(v == q(4), || format!("weak optimum {v}"))?;
    let cert = certify_weak_dual(&Regex::parse("(0+00)0", l.alphabet()).unwrap(), &l).unwrap();
    ensure(cert.w("0") == q(2) && cert.w("00") == q(1) && cert.w.len() == 2, || format!("w = {:?}", cert.w))?;
    let y = cert.y.get(&(lang("{0,00}"), lang("{0}")));
    ensure(y == Some(&q(1)) && cert.y.len() == 1, || format!("y = {:?}", cert.y))?;
    let rep = check_weak_dual_cert(&cert, &closure).unwrap();
    ensure(rep.is_feasible() && rep.objective == Value::Exact(q(4)), || format!("{rep:?}"))?;
    let o = optimal_regex(&l).unwrap();
    ensure(o.length == 4, || format!("oracle {}", o.length))?;
    Ok(format!("opt 4, certificate objective 4, oracle 4 via {}", o.witness))
}

fn c3_sigma() -> Outcome {
    let bin = Alphabet::binary();
    for n in 1..=8usize {
        let a = analytic_sigma_primal(n, &bin).unwrap();
        // Objective over Σⁿ, summed directly.
        let total: Rational = sigma_n(&bin, n).iter().map(|s| a.get_exact(&VarName::indexed("x", s)).unwrap()).sum();
        ensure(total == q(2 * n as i64), || format!("n={n}: primal objective {total}"))?;
        verify_sigma_primal(n, 2).map_err(|e| format!("n={n}: primal {e}"))?;
        let l = sigma_n(&bin, n);
        let cert = certify_weak_dual(&sigma_power(n), &l).unwrap();
        let check = check_weak_dual_sparse(&cert, &sigma_closure_member(n));
        ensure(check.is_feasible(), || format!("n={n}: {:?}", check.violations))?;
        ensure(check.objective == q(2 * n as i64), || format!("n={n}: dual objective {}", check.objective))?;
    }
    for n in 1..=3usize {
        let l = sigma_n(&bin, n);
        let closure = compute_closure(&l, 100_000).map_err(|e| e.to_string())?;
        let v = optimum(&build_weak_primal(&l, &closure).unwrap())?;
        ensure(v == q(2 * n as i64), || format!("n={n}: solved {v}"))?;
    }
    Ok("2n pinned for n ≤ 8, solved for n ≤ 3".into())
}

#[allow(clippy::approx_constant)]
const N8_TABLE: &[(&str, f64)] = &[
    ("0", 1.00), ("1", 1.00), ("00", 2.00), ("01", 2.00), ("10", 2.00), ("000", 3.00), ("001", 2.92), ("010", 2.07),
    ("100", 2.92), ("0000", 4.00), ("0001", 3.11), ("0010", 2.88), ("0100", 2.88), ("1000", 3.11), ("00000", 5.00),
    ("00001", 3.73), ("00010", 3.14), ("00100", 2.96), ("01000", 3.14), ("10000", 3.73), ("000000", 6.00),
    ("000001", 4.15), ("000010", 3.51), ("000100", 3.16), ("001000", 3.16), ("010000", 3.51), ("100000", 4.15),
    ("0000000", 7.00), ("0000001", 4.54), ("0000010", 3.83), ("0000100", 3.39), ("0001000", 3.22), ("0010000", 3.39),
    ("0100000", 3.83), ("1000000", 4.54), ("00000000", 8.00), ("00000001", 4.93), ("00000010", 4.16),
    ("00000100", 3.59), ("00001000", 3.30), ("00010000", 3.30), ("00100000", 3.59), ("01000000", 4.16),
    ("10000000", 4.93),
];

fn c4_b1() -> Outcome {
    for n in 1..=10 {
        let v = optimum(&build_reduced_weak_primal_b_n1(n).unwrap())?;
        ensure(v == q(ceil_n_log_2n(n)), || format!("n={n}: reduced optimum {v}, expected {}", ceil_n_log_2n(n)))?;
        if n <= 4 {
            let l = binomial(n, 1);
            let closure = compute_closure(&l, 100_000).map_err(|e| e.to_string())?;
            let full = optimum(&build_weak_primal(&l, &closure).unwrap())?;
            ensure(full == v, || format!("n={n}: full {full} vs reduced {v}"))?;
        }
    }
    // The table is decimal data, so it is read and checked exactly; the
    // tolerance then applies to exact excesses.
    let lp = build_reduced_weak_primal_b_n1(8).unwrap();
    let mut x = Assignment::exact();
    for (s, v) in N8_TABLE {
        x.set_exact(VarName::indexed("x", s), Rational::new((v * 100.0).round() as i64, 100));
    }
    let a = complete_reduced_b_n1(&lp, &x);
    let rep = check_feasible(&lp, &a, 0.0);
    let tol = Rational::new(1, 100);
    let mut worst = Rational::zero();
    for v in &rep.violations {
        let e = v.excess.as_exact().cloned().unwrap();
        ensure(e <= tol, || format!("n=8 table: {} exceeds by {e}", v.what))?;
        worst = worst.max(e);
    }
    let obj = rep.objective.as_exact().cloned().unwrap();
    ensure((&obj - &q(32)).abs() <= Rational::new(5, 100), || format!("n=8 table objective {obj}"))?;
    Ok(format!("⌈n log 2n⌉ for n ≤ 10; n=8 table objective {}, largest excess {worst}", obj.to_decimal(2)))
}

fn c5_bnk() -> Outcome {
    let mut count = 0;
    for n in 1..=10 {
        for k in 0..=3.min(n) {
            let r = build_ellul_bnk(n, k);
            let len = q(r.length() as i64);
            let v = optimum(&build_relaxed_binomial(n, k).unwrap())?;
            ensure(v == len, || format!("({n},{k}): optimum {v}, |R| = {len}"))?;
            let cert = certify_relaxed_dual(&r, n, k).map_err(|e| format!("({n},{k}): {e}"))?;
            ensure(cert.objective() == len, || format!("({n},{k}): certificate objective {}", cert.objective()))?;
            let rep = check_relaxed_dual_cert(&cert).unwrap();
            ensure(rep.is_feasible(), || format!("({n},{k}): certificate {:?}", rep.violations.first()))?;
            count += 1;
        }
    }
    Ok(format!("{count} pairs equal and certified"))
}

fn random_language(rng: &mut ChaCha8Rng) -> Language {
    let pool: Vec<String> = (1..=3).flat_map(|m| (0..1u32 << m).map(move |v| format!("{v:0m$b}"))).collect();
    let size = rng.gen_range(1..=4);
    let picks: Vec<String> = pool.choose_multiple(rng, size).cloned().collect();
    Language::new(Alphabet::binary(), picks).unwrap()
}

fn c6_strong() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut langs: Vec<Language> = (0..100).map(|_| random_language(&mut rng)).collect();
    langs.extend([lang("{00,000}"), sigma_n(&Alphabet::binary(), 2), threshold(2, 1)]);
    for l in &langs {
        let closure = compute_closure(l, 100_000).map_err(|e| format!("{l}: {e}"))?;
        let strong = optimum(&build_strong_primal(l, &closure).unwrap())?;
        let weak = optimum(&build_weak_primal(l, &closure).unwrap())?;
        let o = optimal_regex(l).map_err(|e| format!("{l}: {e}"))?;
        ensure(o.witness.language() == *l && o.witness.length() == o.length, || format!("{l}: witness {}", o.witness))?;
        ensure(strong == q(o.length as i64), || format!("{l}: strong {strong}, oracle {}", o.length))?;
        ensure(weak <= strong, || format!("{l}: weak {weak} > strong {strong}"))?;
    }
    Ok(format!("{} languages", langs.len()))
}

fn c7_caveat() -> Outcome {
    let mut out = Vec::new();
    for n in [2usize, 3] {
        let l = threshold(n, 1);
        let closure = compute_closure(&l, 100_000).map_err(|e| e.to_string())?;
        let v = optimum(&build_weak_primal(&l, &closure).unwrap())?;
        ensure(v <= q(4 * n as i64), || format!("n={n}: {v} > {}", 4 * n))?;
        out.push(format!("n={n}: {v}"));
    }
    Ok(out.join(", "))
}

fn c8_threshold() -> Outcome {
    let l = threshold(3, 1);
    let closure = compute_closure(&l, 100_000).map_err(|e| e.to_string())?;
    let lp = build_strong_primal(&l, &closure).unwrap();
    let a = threshold_strong_on(&closure);
    let rep = check_feasible(&lp, &a, 1e-9);
    ensure(rep.is_feasible(), || format!("{:?}", rep.violations.first()))?;
    let target = 3.0 * (3.0 * std::f64::consts::E).ln();
    let obj = objective(&lp, &a).to_f64();
    ensure((obj - target).abs() <= 1e-9, || format!("objective {obj} vs {target}"))?;
    let v = optimum(&lp)?;
    ensure(v.to_f64() >= target - 1e-6, || format!("strong optimum {v} below {target}"))?;
    Ok(format!("analytic {obj:.4}, strong optimum {v}"))
}

fn c9_growth() -> Outcome {
    for n in 1..=32usize {
        let lp = build_relaxed_binomial(n, 1).unwrap();
        let rep = check_feasible(&lp, &analytic_binomial1_primal(n).unwrap(), 1e-9);
        ensure(rep.is_feasible(), || format!("B({n},1): {:?}", rep.violations.first()))?;
        let nf = n as f64;
        let want = nf * (1.0 + nf.ln());
        ensure((rep.objective.to_f64() - want).abs() <= 1e-9 * want.max(1.0), || format!("B({n},1) objective"))?;
    }
    let t = calibrate_alphas(3, 24).map_err(|e| e.to_string())?;
    let mut objectives = Vec::new();
    for n in 1..=24usize {
        for k in 1..=3.min(n) {
            let lp = build_relaxed_binomial(n, k).unwrap();
            let g = analytic_g(n, k, &t).unwrap();
            let rep = check_feasible(&lp, &g, 1e-9);
            ensure(rep.is_feasible(), || format!("g in ({n},{k}): {:?}", rep.violations.first()))?;
            objectives.push((n, k, rep.objective.to_f64()));
        }
    }
    for &(n, k, obj) in objectives.iter().filter(|o| [8, 16, 24].contains(&o.0)) {
        let nf = n as f64;
        let ratio = obj / (nf * nf.ln().powi(k as i32));
        let (lo, hi) = t.ratio_interval(k).ok_or("missing interval")?;
        ensure(lo - 1e-12 <= ratio && ratio <= hi + 1e-12, || format!("({n},{k}): ratio {ratio} outside [{lo}, {hi}]"))?;
    }
    Ok(format!("α = {:?}", t.alphas))
}

fn random_regex(rng: &mut ChaCha8Rng, depth: usize) -> Regex {
    if depth == 0 || rng.gen_bool(0.3) {
        return Regex::sym(if rng.gen_bool(0.5) { '0' } else { '1' });
    }
    let (a, b) = (random_regex(rng, depth - 1), random_regex(rng, depth - 1));
    if rng.gen_bool(0.5) {
        Regex::union(a, b)
    } else {
        Regex::concat(a, b)
    }
}

fn c10_structure() -> Outcome {
    let bin = Alphabet::binary();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let r = random_regex(&mut rng, 5);
        let text = r.render();
        let back = Regex::parse(&text, &bin).map_err(|e| format!("{text}: {e}"))?;
        ensure(back.render() == text && back.length() == r.length(), || format!("{text} -> {}", back.render()))?;
        ensure(back.language() == r.language(), || format!("{text}: language changed"))?;
    }

    for l in [lang("{00,000}"), sigma_n(&bin, 2), threshold(2, 1), lang("{001,111}")] {
        let c = compute_closure(&l, 100_000).unwrap();
        let pairs = [
            (build_weak_primal(&l, &c).unwrap(), build_weak_dual(&l, &c).unwrap()),
            (build_strong_primal(&l, &c).unwrap(), build_strong_dual(&l, &c).unwrap()),
        ];
        for (p, d) in pairs {
            if let Some(diff) = transpose(&p).canonical().first_difference(&d.canonical()) {
                return Err(format!("{l}: {diff}"));
            }
        }
    }
    for n in 1..=5 {
        for k in 0..=n {
            let (p, d) = (build_relaxed_binomial(n, k).unwrap(), build_relaxed_binomial_dual(n, k).unwrap());
            if let Some(diff) = transpose(&p).canonical().first_difference(&d.canonical()) {
                return Err(format!("({n},{k}): {diff}"));
            }
        }
    }

    for n in 1..=3 {
        let got: BTreeSet<Language> = compute_closure(&sigma_n(&bin, n), 100_000).unwrap().members().iter().cloned().collect();
        ensure(got == sigma_closure_closed_form(&bin, n), || format!("closure of Σ^{n}"))?;
    }
    for n in 1..=4 {
        for k in 0..=2.min(n) {
            let got: BTreeSet<Language> = compute_closure(&binomial(n, k), 100_000).unwrap().members().iter().cloned().collect();
            ensure(got == binomial_closure_closed_form(n, k), || format!("closure of B({n},{k})"))?;
        }
    }

    for m1 in 0..=12 {
        for m2 in 0..=12 {
            for l1 in 0..=m1 {
                for l2 in 0..=m2 {
                    ensure(binom(m1 + m2, l1 + l2) >= binom(m1, l1) * binom(m2, l2), || format!("C({m1}+{m2},{l1}+{l2})"))?;
                }
            }
        }
    }
    let f = |x: f64| x * x.ln() * x.ln();
    for m in 1..=10_000u32 {
        let mf = m as f64;
        for n in 1..=10_000u32 {
            let nf = n as f64;
            let s = mf + nf;
            if f(s) - f(mf) - f(nf) > 2.0 * s * s.ln() * (1.0 + 1e-12) {
                return Err(format!("convexity fails at m={m}, n={n}"));
            }
        }
    }

    let solved = SOLVED.load(Ordering::Relaxed);
    let failed = DUALITY_FAILURES.load(Ordering::Relaxed);
    ensure(failed == 0, || format!("{failed} of {solved} solved instances failed the duality check"))?;
    Ok(format!("duality exact on {solved} solved instances"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("toy program", c1_toy),
        ("simple primal and dual", c2_simple),
        ("Σⁿ sandwich", c3_sigma),
        ("B(n,1) conjecture", c4_b1),
        ("relaxed B(n,k) sweep", c5_bnk),
        ("strong program equals oracle", c6_strong),
        ("threshold caveat", c7_caveat),
        ("threshold strong solution", c8_threshold),
        ("g feasibility and growth", c9_growth),
        ("structural invariants", c10_structure),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
