//! Constructive feasible solutions: dual certificates built from regular
//! expressions, and closed-form primal assignments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::closure::{binomial_index, compute_closure, ClosureSet, DEFAULT_CLOSURE_CAP};
use crate::combin::binom;
use crate::error::{Error, Result};
use crate::lang::{binomial_strings, canon_cmp, threshold, weight, Alphabet, Language};
use crate::lp::{
    build_relaxed_binomial, build_relaxed_binomial_dual, build_weak_dual, check_feasible, Assignment,
    FeasibilityReport, LinearProgram, Value, VarName, Violation,
};
use crate::rational::Rational;
use crate::regex::Regex;

/// Certificate for the weak dual of `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakDualCert {
    pub target: Language,
    pub w: BTreeMap<String, Rational>,
    pub y: BTreeMap<(Language, Language), Rational>,
}

impl WeakDualCert {
    /// `Σ |s| w_s`.
    pub fn objective(&self) -> Rational {
        self.w.iter().map(|(s, v)| Rational::from_integer(s.chars().count() as i64) * v).sum()
    }

    pub fn w(&self, s: &str) -> Rational {
        self.w.get(s).cloned().unwrap_or_default()
    }

    /// Named as the variables of [`build_weak_dual`].
    pub fn to_assignment(&self) -> Assignment {
        let mut a = Assignment::exact();
        for (s, v) in &self.w {
            a.set_exact(VarName::indexed("w", s), v.clone());
        }
        for ((k1, k2), v) in &self.y {
            a.set_exact(VarName::pair("y", k1, k2), v.clone());
        }
        a
    }
}

/// Certificate for the dual of the relaxed binomial program.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedDualCert {
    pub n: usize,
    pub k: usize,
    pub w: BTreeMap<String, Rational>,
    pub y: BTreeMap<(usize, usize, usize, usize), Rational>,
}

impl RelaxedDualCert {
    pub fn objective(&self) -> Rational {
        self.w.iter().map(|(s, v)| Rational::from_integer(s.len() as i64) * v).sum()
    }

    /// Named as the variables of [`build_relaxed_binomial_dual`].
    pub fn to_assignment(&self) -> Assignment {
        let mut a = Assignment::exact();
        for (s, v) in &self.w {
            a.set_exact(VarName::indexed("w", s), v.clone());
        }
        for (q, v) in &self.y {
            a.set_exact(VarName::quad(*q), v.clone());
        }
        a
    }
}

/// Factor of a concatenation chain after merging adjacent symbols into terms.
enum Piece<'a> {
    Term(String),
    Expr(&'a Regex),
}

fn pieces(r: &Regex) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut run = String::new();
    for f in r.concat_factors() {
        match f {
            Regex::Symbol(c) => run.push(*c),
            other => {
                if !run.is_empty() {
                    out.push(Piece::Term(std::mem::take(&mut run)));
                }
                out.push(Piece::Expr(other));
            }
        }
    }
    if !run.is_empty() {
        out.push(Piece::Term(run));
    }
    out
}

/// Walks `r` in the order of the dual procedures. Concatenations split at the
/// rightmost boundary of the merged chain: adjacent pieces are never both
/// terms, so every boundary qualifies.
trait Visitor {
    fn term(&mut self, s: &str) -> Result<Language>;
    fn concat(&mut self, left: &Language, right: &Language) -> Result<()>;

    fn walk(&mut self, r: &Regex, alphabet: &Alphabet) -> Result<Language> {
        match r {
            Regex::Union(a, b) => {
                let la = self.walk(a, alphabet)?;
                let lb = self.walk(b, alphabet)?;
                la.union(&lb)
            }
            _ => {
                let ps = pieces(r);
                self.chain(&ps, alphabet)
            }
        }
    }

    fn chain(&mut self, ps: &[Piece<'_>], alphabet: &Alphabet) -> Result<Language> {
        if ps.len() == 1 {
            return match &ps[0] {
                Piece::Term(s) => self.term(s),
                Piece::Expr(e) => self.walk(e, alphabet),
            };
        }
        let left = self.chain(&ps[..ps.len() - 1], alphabet)?;
        let right = self.chain(&ps[ps.len() - 1..], alphabet)?;
        self.concat(&left, &right)?;
        left.concat(&right)
    }
}

struct WeakBuilder {
    alphabet: Alphabet,
    w: BTreeMap<String, Rational>,
    y: BTreeMap<(Language, Language), Rational>,
}

impl Visitor for WeakBuilder {
    fn term(&mut self, s: &str) -> Result<Language> {
        *self.w.entry(s.to_string()).or_default() += Rational::one();
        Language::singleton(self.alphabet.clone(), s)
    }

    fn concat(&mut self, left: &Language, right: &Language) -> Result<()> {
        *self.y.entry((left.clone(), right.clone())).or_default() += Rational::one();
        Ok(())
    }
}

/// Integer certificate for the weak dual of `l`: `w[s]` counts the
/// occurrences of `s` as a term, and every concatenation node adds one to
/// `y[L(R1),L(R2)]`.
pub fn certify_weak_dual(r: &Regex, l: &Language) -> Result<WeakDualCert> {
    let mut b = WeakBuilder { alphabet: l.alphabet().clone(), w: BTreeMap::new(), y: BTreeMap::new() };
    let got = b.walk(r, l.alphabet())?;
    if &got != l {
        return Err(Error::LanguageMismatch { expected: l.to_string(), actual: got.to_string() });
    }
    Ok(WeakDualCert { target: l.clone(), w: b.w, y: b.y })
}

/// Block `(m, l)` of a binary language of uniform length and weight.
fn block_of(l: &Language) -> Option<(usize, usize)> {
    let first = l.members().first()?;
    let (m, k) = (first.len(), weight(first));
    l.iter().all(|s| s.len() == m && weight(s) == k).then_some((m, k))
}

/// Construction used by [`certify_relaxed_dual_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxedRule {
    /// Terms spread unit mass uniformly over their block; a concatenation
    /// of `L1 ⊆ B(m1,l1)` and `L2 ⊆ B(m2,l2)` adds `|L1||L2| / C(m1+m2, l1+l2)`
    /// to `y[m1,l1,m2,l2]`. Not feasible in general: the new `y` only covers
    /// `B(m1,l1)B(m2,l2)`, a strict part of `B(m1+m2,l1+l2)` once both
    /// factors can hold ones (already for `R_{3,1}`).
    Spread,
    /// Terms count once at themselves and every concatenation adds one to
    /// `y[m1,l1,m2,l2]`. Requires both operands of every concatenation to be
    /// whole blocks, and is then feasible.
    Complete,
}

struct RelaxedBuilder {
    n: usize,
    k: usize,
    rule: RelaxedRule,
    w: BTreeMap<String, Rational>,
    y: BTreeMap<(usize, usize, usize, usize), Rational>,
}

impl RelaxedBuilder {
    fn block(&self, l: &Language) -> Result<(usize, usize)> {
        match block_of(l) {
            Some((m, b)) if m >= 1 && m <= self.n && b <= m.min(self.k) => Ok((m, b)),
            _ => Err(Error::Language(format!("{l} is not inside a block of the B({},{}) family", self.n, self.k))),
        }
    }
}

impl Visitor for RelaxedBuilder {
    fn term(&mut self, s: &str) -> Result<Language> {
        let single = Language::singleton(Alphabet::binary(), s)?;
        let (m, l) = self.block(&single)?;
        match self.rule {
            RelaxedRule::Spread => {
                let share = Rational::new(1, binom(m, l) as i64);
                for t in binomial_strings(m, l) {
                    *self.w.entry(t).or_default() += &share;
                }
            }
            RelaxedRule::Complete => *self.w.entry(s.to_string()).or_default() += Rational::one(),
        }
        Ok(single)
    }

    fn concat(&mut self, left: &Language, right: &Language) -> Result<()> {
        let (m1, l1) = self.block(left)?;
        let (m2, l2) = self.block(right)?;
        if m1 + m2 > self.n || l1 + l2 > self.k {
            return Err(Error::Language(format!("{left}·{right} leaves the B({},{}) family", self.n, self.k)));
        }
        let v = match self.rule {
            RelaxedRule::Spread => Rational::new((left.len() * right.len()) as i64, binom(m1 + m2, l1 + l2) as i64),
            RelaxedRule::Complete => {
                if left.len() as u128 != binom(m1, l1) || right.len() as u128 != binom(m2, l2) {
                    return Err(Error::Language(format!("{left}·{right} is not a product of whole blocks")));
                }
                Rational::one()
            }
        };
        *self.y.entry((m1, l1, m2, l2)).or_default() += v;
        Ok(())
    }
}

/// Certificate for the relaxed dual of `B(n,k)` from an expression whose
/// language lies inside one block of the family. Uses
/// [`RelaxedRule::Complete`] when every concatenation joins whole blocks
/// (as in `R_{n,k}`), and [`RelaxedRule::Spread`] otherwise.
pub fn certify_relaxed_dual(r: &Regex, n: usize, k: usize) -> Result<RelaxedDualCert> {
    certify_relaxed_dual_with(r, n, k, RelaxedRule::Complete)
        .or_else(|_| certify_relaxed_dual_with(r, n, k, RelaxedRule::Spread))
}

pub fn certify_relaxed_dual_with(r: &Regex, n: usize, k: usize, rule: RelaxedRule) -> Result<RelaxedDualCert> {
    binomial_index(n, k)?;
    let mut b = RelaxedBuilder { n, k, rule, w: BTreeMap::new(), y: BTreeMap::new() };
    let got = b.walk(r, &Alphabet::binary())?;
    b.block(&got)?;
    Ok(RelaxedDualCert { n, k, w: b.w, y: b.y })
}

/// [`check_feasible`] at zero tolerance, also rejecting names the program
/// does not have.
pub fn check_certificate(lp: &LinearProgram, a: &Assignment) -> FeasibilityReport {
    let mut report = check_feasible(lp, a, 0.0);
    let names: Vec<(VarName, f64)> = a.iter_f64();
    for (name, _) in names {
        if lp.var_index(&name).is_none() {
            report.violations.push(Violation { what: format!("unknown variable {name}"), excess: Value::Float(f64::NAN) });
        }
    }
    report
}

pub fn check_weak_dual_cert(cert: &WeakDualCert, closure: &ClosureSet) -> Result<FeasibilityReport> {
    let lp = build_weak_dual(&cert.target, closure)?;
    Ok(check_certificate(&lp, &cert.to_assignment()))
}

pub fn check_relaxed_dual_cert(cert: &RelaxedDualCert) -> Result<FeasibilityReport> {
    let lp = build_relaxed_binomial_dual(cert.n, cert.k)?;
    Ok(check_certificate(&lp, &cert.to_assignment()))
}

/// Outcome of [`check_weak_dual_sparse`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCheck {
    pub violations: Vec<String>,
    pub objective: Rational,
}

impl SparseCheck {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a weak dual certificate without materializing the closure.
///
/// `in_closure` decides membership in the closure of the target. Every row
/// of the weak dual whose string is untouched by the certificate reads
/// `0 ≥ [s ∈ L]`, so only touched strings and members of the target need
/// evaluating.
pub fn check_weak_dual_sparse(cert: &WeakDualCert, in_closure: &dyn Fn(&Language) -> bool) -> SparseCheck {
    let mut violations = Vec::new();
    let mut lhs: HashMap<String, Rational> = HashMap::new();
    let alphabet = cert.target.alphabet().clone();
    for (s, v) in &cert.w {
        if v.is_negative() {
            violations.push(format!("w[{s}] is negative"));
        }
        match Language::singleton(alphabet.clone(), s) {
            Ok(single) if in_closure(&single) => {}
            _ => violations.push(format!("w[{s}] is not a variable")),
        }
        *lhs.entry(s.clone()).or_default() += v;
    }
    for ((k1, k2), v) in &cert.y {
        if v.is_negative() {
            violations.push(format!("y[{k1},{k2}] is negative"));
        }
        let product = match k1.concat(k2) {
            Ok(p) if p.len() == k1.len() * k2.len() => p,
            _ => {
                violations.push(format!("y[{k1},{k2}] is not a variable"));
                continue;
            }
        };
        if !(in_closure(&product) && in_closure(k1) && in_closure(k2)) {
            violations.push(format!("y[{k1},{k2}] is not a variable"));
        }
        for s in product.iter() {
            *lhs.entry(s.to_string()).or_default() += v;
        }
        for s in k1.iter().chain(k2.iter()) {
            *lhs.entry(s.to_string()).or_default() -= v;
        }
    }
    let mut rows: BTreeSet<String> = lhs.keys().cloned().collect();
    rows.extend(cert.target.iter().map(str::to_string));
    let mut rows: Vec<String> = rows.into_iter().collect();
    rows.sort_by(|a, b| canon_cmp(a, b));
    for s in rows {
        let got = lhs.get(&s).cloned().unwrap_or_default();
        let need = if cert.target.contains(&s) { Rational::one() } else { Rational::zero() };
        if got < need {
            violations.push(format!("row x[{s}]: {got} < {need}"));
        }
    }
    SparseCheck { violations, objective: cert.objective() }
}

/// Closure membership for `Σⁿ`: nonempty sets of equal-length strings of
/// length at most `n`.
pub fn sigma_closure_member(n: usize) -> impl Fn(&Language) -> bool {
    move |k: &Language| !k.is_empty() && k.is_uniform() && k.max_len() >= 1 && k.max_len() <= n
}

/// `x_s = |s| / |Σ|^{|s|-1}` on `Σ^{≤n}`; objective `|Σ|·n`.
pub fn analytic_sigma_primal(n: usize, alphabet: &Alphabet) -> Result<Assignment> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let q = alphabet.len() as i64;
    let mut a = Assignment::exact();
    let mut layer = vec![String::new()];
    for m in 1..=n {
        layer = layer
            .iter()
            .flat_map(|p| alphabet.symbols().iter().map(move |c| format!("{p}{c}")))
            .collect();
        let denom = num_traits::pow(num_bigint::BigInt::from(q), m - 1);
        let v = Rational::from_big(num_rational::BigRational::new(num_bigint::BigInt::from(m), denom));
        for s in &layer {
            a.set_exact(VarName::indexed("x", s), v.clone());
        }
    }
    Ok(a)
}

/// Checks the weak program of `Σⁿ` for [`analytic_sigma_primal`] without
/// enumerating the closure.
///
/// Every concatenation row pairs `K1 ⊆ Σ^a`, `K2 ⊆ Σ^b` with `a + b ≤ n`,
/// and for this assignment it reads `pq·f(a+b) ≤ p·f(a) + q·f(b)` with
/// `p = |K1|`, `q = |K2|`; all such `(a, b, p, q)` are tried exactly.
pub fn verify_sigma_primal(n: usize, alphabet_size: usize) -> std::result::Result<(), String> {
    let q = Rational::from_integer(alphabet_size as i64);
    let f = |m: usize| {
        let mut d = Rational::one();
        for _ in 1..m {
            d = &d * &q;
        }
        Rational::from_integer(m as i64) / d
    };
    for m in 1..=n {
        if f(m) > Rational::from_integer(m as i64) || f(m).is_negative() {
            return Err(format!("bound on strings of length {m}"));
        }
    }
    for a in 1..n {
        for b in 1..=(n - a) {
            let (fa, fb, fab) = (f(a), f(b), f(a + b));
            let max_p = alphabet_size.checked_pow(a as u32).ok_or("block too large")?;
            let max_q = alphabet_size.checked_pow(b as u32).ok_or("block too large")?;
            for p in 1..=max_p {
                for r in 1..=max_q {
                    let (pr, rr) = (Rational::from_integer(p as i64), Rational::from_integer(r as i64));
                    if &(&pr * &rr) * &fab > &(&pr * &fa) + &(&rr * &fb) {
                        return Err(format!("row with |K1|={p} ⊆ Σ^{a}, |K2|={r} ⊆ Σ^{b}"));
                    }
                }
            }
        }
    }
    Ok(())
}

/// `x_s = |s|` without ones and `ln(e|s|)` with one `1`, on the strings of
/// [`binomial_index`]`(n, 1)`.
pub fn analytic_binomial1_primal(n: usize) -> Result<Assignment> {
    let idx = binomial_index(n, 1.min(n))?;
    let mut a = Assignment::float();
    for s in idx.strings() {
        a.set_f64(VarName::indexed("x", &s), g_base(&s));
    }
    Ok(a)
}

fn g_base(s: &str) -> f64 {
    let m = s.len() as f64;
    match weight(s) {
        0 => m,
        1 => 1.0 + m.ln(),
        _ => unreachable!("weight at most one"),
    }
}

/// Strong-program assignment for `T(n,1)`: `X[K] = n'` when `0^{n'} ∈ K`,
/// otherwise `m·ln(e n')` with `m` the number of weight-one members.
pub fn analytic_threshold_strong(n: usize) -> Result<Assignment> {
    let closure = compute_closure(&threshold(n, 1), DEFAULT_CLOSURE_CAP)?;
    Ok(threshold_strong_on(&closure))
}

/// [`analytic_threshold_strong`] on an already computed closure.
pub fn threshold_strong_on(closure: &ClosureSet) -> Assignment {
    let mut a = Assignment::float();
    for k in closure.members() {
        let len = k.max_len();
        let v = if k.contains(&"0".repeat(len)) {
            len as f64
        } else {
            let m = k.iter().filter(|s| weight(s) == 1).count() as f64;
            m * (1.0 + (len as f64).ln())
        };
        a.set_f64(VarName::indexed("X", k), v);
    }
    a
}

/// Constants `α₁, α₂, …` of the map g, with the range they were checked on.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    /// `alphas[j]` is `α_{j+1}`.
    pub alphas: Vec<f64>,
    pub kmax: usize,
    pub nmax: usize,
    /// For each `k` in `1..=kmax`, the range of `Σ_{B(n,k)} g / (n lnᵏ n)`
    /// over `max(2,k) ≤ n ≤ max(nmax, RATIO_NMAX)`.
    pub ratios: Vec<(usize, f64, f64)>,
    pub note: String,
}

impl AlphaTable {
    pub fn alpha(&self, j: usize) -> Option<f64> {
        j.checked_sub(1).and_then(|i| self.alphas.get(i)).copied()
    }

    pub fn ratio_interval(&self, k: usize) -> Option<(f64, f64)> {
        self.ratios.iter().find(|r| r.0 == k).map(|r| (r.1, r.2))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.note);
        let _ = writeln!(out, "kmax {}", self.kmax);
        let _ = writeln!(out, "nmax {}", self.nmax);
        for (i, a) in self.alphas.iter().enumerate() {
            let _ = writeln!(out, "alpha{} {a:e}", i + 1);
        }
        for (k, lo, hi) in &self.ratios {
            let _ = writeln!(out, "ratio{k} {lo:e} {hi:e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<AlphaTable> {
        let bad = |l: &str| Error::Format(format!("alpha table: bad line `{l}`"));
        let mut t = AlphaTable { alphas: Vec::new(), kmax: 0, nmax: 0, ratios: Vec::new(), note: String::new() };
        let mut alphas: BTreeMap<usize, f64> = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(c) = line.strip_prefix('#') {
                t.note = c.trim().to_string();
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| parts.get(i).and_then(|p| p.parse::<f64>().ok()).ok_or_else(|| bad(line));
            match parts[0] {
                "kmax" => t.kmax = num(1)? as usize,
                "nmax" => t.nmax = num(1)? as usize,
                key if key.starts_with("alpha") => {
                    let j: usize = key[5..].parse().map_err(|_| bad(line))?;
                    let v = num(1)?;
                    if v.is_nan() || v <= 0.0 || j == 0 {
                        return Err(bad(line));
                    }
                    alphas.insert(j, v);
                }
                key if key.starts_with("ratio") => {
                    let k: usize = key[5..].parse().map_err(|_| bad(line))?;
                    t.ratios.push((k, num(1)?, num(2)?));
                }
                _ => return Err(bad(line)),
            }
        }
        for (i, (j, v)) in alphas.into_iter().enumerate() {
            if j != i + 1 {
                return Err(Error::Format(format!("alpha table: alpha{} missing", i + 1)));
            }
            t.alphas.push(v);
        }
        Ok(t)
    }
}

/// `ln^{l-1}(p) / p^{l-1}`, the shape of g on weight `l ≥ 2`.
fn shape(l: usize, p: usize) -> f64 {
    let p = p as f64;
    (p.ln() / p).powi(l as i32 - 1)
}

/// Index of the first and one past the last `1`.
fn span(s: &str) -> usize {
    let first = s.find('1').expect("weight at least two");
    let last = s.rfind('1').expect("weight at least two");
    last - first + 1
}

fn g_value(s: &str, alphas: &[f64]) -> Option<f64> {
    match weight(s) {
        0 | 1 => Some(g_base(s)),
        l => alphas.get(l - 2).map(|a| a * shape(l, span(s))),
    }
}

/// The map g on the strings of [`binomial_index`]`(n, k)`.
pub fn analytic_g(n: usize, k: usize, alphas: &AlphaTable) -> Result<Assignment> {
    let idx = binomial_index(n, k)?;
    if k >= 2 && alphas.alphas.len() < k - 1 {
        return Err(Error::OutOfRange(format!("weight {k} needs α_{}, table has {}", k - 1, alphas.alphas.len())));
    }
    let mut a = Assignment::float();
    for s in idx.strings() {
        let v = g_value(&s, &alphas.alphas).expect("checked range");
        a.set_f64(VarName::indexed("x", &s), v);
    }
    Ok(a)
}

/// `Σ_{s∈B(m,l)} g(s)` without α for `l ≥ 2`: strings of span `p` number
/// `(m−p+1)·C(p−2, l−2)`.
fn block_shape_sum(m: usize, l: usize) -> f64 {
    (l..=m).map(|p| (m - p + 1) as f64 * binom(p - 2, l - 2) as f64 * shape(l, p)).sum()
}

fn block_g_sum(m: usize, l: usize, alphas: &[f64]) -> f64 {
    match l {
        0 => m as f64,
        1 => m as f64 * (1.0 + (m as f64).ln()),
        _ => alphas[l - 2] * block_shape_sum(m, l),
    }
}

/// Objective of g on `B(n,k)`.
pub fn g_objective(n: usize, k: usize, alphas: &AlphaTable) -> Result<f64> {
    if k > n || (k >= 2 && alphas.alphas.len() < k - 1) {
        return Err(Error::OutOfRange(format!("g objective for n={n}, k={k}")));
    }
    Ok(block_g_sum(n, k, &alphas.alphas))
}

/// `LHS − RHS` of the relaxed row `(n1,k1,n2,k2)` under g, by counting
/// strings per span rather than enumerating them.
fn g_row_excess(q: (usize, usize, usize, usize), alphas: &[f64]) -> f64 {
    let (n1, k1, n2, k2) = q;
    let rhs = block_g_sum(n1, k1, alphas) + block_g_sum(n2, k2, alphas);
    let lhs = match (k1, k2) {
        (0, 0) => (n1 + n2) as f64,
        (0, 1) => n2 as f64 * (1.0 + ((n1 + n2) as f64).ln()),
        (1, 0) => n1 as f64 * (1.0 + ((n1 + n2) as f64).ln()),
        // Padding with zeros keeps the span.
        (0, _) => block_g_sum(n2, k2, alphas),
        (_, 0) => block_g_sum(n1, k1, alphas),
        _ => {
            let l = k1 + k2;
            let mut acc = 0.0;
            // First 1 of the left factor at index i, last 1 of the right at j.
            for i in 0..=(n1 - k1) {
                let ca = binom(n1 - 1 - i, k1 - 1) as f64;
                for j in (k2 - 1)..n2 {
                    let cb = binom(j, k2 - 1) as f64;
                    acc += ca * cb * shape(l, (n1 - i) + j + 1);
                }
            }
            alphas[l - 2] * acc
        }
    };
    lhs - rhs
}

/// First violated constraint of the relaxed program `(nmax, k)` under g
/// for rows and bounds involving weight exactly `k`.
fn first_g_violation(nmax: usize, k: usize, alphas: &[f64], tol: f64) -> Option<String> {
    if k >= 2 {
        for m in k..=nmax {
            for p in k..=m {
                let v = alphas[k - 2] * shape(k, p);
                if v - m as f64 > tol {
                    return Some(format!("bound on B({m},{k}) strings of span {p}"));
                }
            }
        }
    }
    let idx = binomial_index(nmax, k.min(nmax)).ok()?;
    for q in idx.concat {
        if q.1 + q.3 != k {
            continue;
        }
        let ex = g_row_excess(q, alphas);
        if ex > tol || ex.is_nan() {
            return Some(format!("row {} exceeds by {ex:e}", VarName::quad(q)));
        }
    }
    None
}

const CALIBRATION_TOL: f64 = 1e-9;

/// Ratios are cheap, so the recorded interval extends past the checked range.
pub const RATIO_NMAX: usize = 64;

/// Largest power-of-two `α_{k-1}` for each `k = 2..=kmax` such that g is
/// feasible in the relaxed program of `(n, k)` for all `n ≤ nmax`, chosen in
/// increasing `k`. Each value is confirmed with [`check_feasible`] on the
/// built program before it is accepted.
pub fn calibrate_alphas(kmax: usize, nmax: usize) -> Result<AlphaTable> {
    if kmax == 0 || nmax < kmax {
        return Err(Error::OutOfRange(format!("calibration needs 1 ≤ kmax ≤ nmax, got kmax={kmax}, nmax={nmax}")));
    }
    let mut alphas: Vec<f64> = Vec::new();
    if let Some(v) = first_g_violation(nmax, 1, &alphas, CALIBRATION_TOL) {
        return Err(Error::Calibration(format!("k=1: {v}")));
    }
    for k in 2..=kmax {
        let feasible = |j: i32, alphas: &mut Vec<f64>| {
            alphas.push(2f64.powi(j));
            let ok = first_g_violation(nmax, k, alphas, CALIBRATION_TOL).is_none();
            alphas.pop();
            ok
        };
        let (mut lo, mut hi) = (-60i32, 40i32);
        if !feasible(lo, &mut alphas) {
            alphas.push(2f64.powi(lo));
            let v = first_g_violation(nmax, k, &alphas, CALIBRATION_TOL).unwrap_or_default();
            return Err(Error::Calibration(format!("k={k}: no feasible α_{} down to 2^{lo}; {v}", k - 1)));
        }
        if feasible(hi, &mut alphas) {
            lo = hi;
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if feasible(mid, &mut alphas) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        alphas.push(2f64.powi(lo));
    }
    let mut table = AlphaTable {
        alphas,
        kmax,
        nmax,
        ratios: Vec::new(),
        note: format!("g constants from a factor-2 search against relaxed programs up to n={nmax}; local to this tool"),
    };
    for k in 1..=kmax {
        let lp = build_relaxed_binomial(nmax, k)?;
        let report = check_feasible(&lp, &analytic_g(nmax, k, &table)?, CALIBRATION_TOL);
        if let Some(v) = report.violations.first() {
            return Err(Error::Calibration(format!("k={k}: {} violated by {}", v.what, v.excess)));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for n in k.max(2)..=nmax.max(RATIO_NMAX) {
            let r = g_ratio(n, k, &table)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        table.ratios.push((k, lo, hi));
    }
    Ok(table)
}

/// `Σ_{B(n,k)} g / (n lnᵏ n)`.
pub fn g_ratio(n: usize, k: usize, alphas: &AlphaTable) -> Result<f64> {
    let nf = n as f64;
    Ok(g_objective(n, k, alphas)? / (nf * nf.ln().powi(k as i32)))
}

/// Lemma-style double sum `Σ_{i≤m} Σ_{j≤n} α₁ ln(i+j)/(i+j)` against
/// `m ln(em) + n ln(en)`.
pub fn first_complete_sign_holds(alpha1: f64, m: usize, n: usize) -> bool {
    let mut lhs = 0.0;
    for i in 1..=m {
        for j in 1..=n {
            let x = (i + j) as f64;
            lhs += alpha1 * x.ln() / x;
        }
    }
    let (mf, nf) = (m as f64, n as f64);
    lhs <= mf * (1.0 + mf.ln()) + nf * (1.0 + nf.ln()) + CALIBRATION_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::compute_closure;
    use crate::lang::{binomial, sigma_n};
    use crate::lp::{build_strong_primal, build_weak_primal, objective};
    use crate::regex::{build_ellul_bnk, sigma_power};

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn lang(s: &str) -> Language {
        Language::parse(s).unwrap()
    }

    #[test]
    fn simple_dual_certificate() {
        let l = lang("{00,000}");
        let r = Regex::parse_infer("(0+00)0").unwrap();
        let c = certify_weak_dual(&r, &l).unwrap();
        assert_eq!(c.w("0"), q(2));
        assert_eq!(c.w("00"), q(1));
        assert_eq!(c.w("000"), q(0));
        assert_eq!(c.y.len(), 1);
        assert_eq!(c.y[&(lang("{0,00}"), lang("{0}"))], q(1));
        assert_eq!(c.objective(), q(4));
        let closure = compute_closure(&l, 1000).unwrap();
        let rep = check_weak_dual_cert(&c, &closure).unwrap();
        assert!(rep.is_feasible(), "{:?}", rep.violations);
        assert_eq!(rep.objective, Value::Exact(q(4)));
    }

    #[test]
    fn single_term_certificate() {
        let l = lang("{0110}");
        let c = certify_weak_dual(&Regex::word("0110"), &l).unwrap();
        assert_eq!(c.w.len(), 1);
        assert_eq!(c.w("0110"), q(1));
        assert!(c.y.is_empty());
    }

    #[test]
    fn mismatch_is_rejected() {
        let r = Regex::parse_infer("(0+1)0").unwrap();
        assert!(matches!(certify_weak_dual(&r, &lang("{00}")), Err(Error::LanguageMismatch { .. })));
    }

    #[test]
    fn sigma_certificate_shape() {
        for n in 1..=5 {
            let l = sigma_n(&Alphabet::binary(), n);
            let c = certify_weak_dual(&sigma_power(n), &l).unwrap();
            assert_eq!(c.w("0"), q(n as i64));
            assert_eq!(c.w("1"), q(n as i64));
            assert_eq!(c.w.len(), 2);
            assert_eq!(c.y.len(), n - 1);
            for k in 1..n {
                let key = (sigma_n(&Alphabet::binary(), k), sigma_n(&Alphabet::binary(), 1));
                assert_eq!(c.y[&key], q(1), "n={n} k={k}");
            }
            let sparse = check_weak_dual_sparse(&c, &sigma_closure_member(n));
            assert!(sparse.is_feasible(), "{:?}", sparse.violations);
            assert_eq!(sparse.objective, q(2 * n as i64));
        }
    }

    #[test]
    fn sparse_check_agrees_with_full_check() {
        let cases = ["(0+1)(0+1)", "(00+01+10+11)", "0(0+1)+1(0+1)", "(0+1)0(0+1)"];
        for text in cases {
            let r = Regex::parse_infer(text).unwrap();
            let l = r.language();
            let c = certify_weak_dual(&r, &l).unwrap();
            let closure = compute_closure(&l, 10_000).unwrap();
            let full = check_weak_dual_cert(&c, &closure).unwrap();
            let sparse = check_weak_dual_sparse(&c, &|k: &Language| closure.contains(k));
            assert_eq!(full.is_feasible(), sparse.is_feasible(), "{text}");
            assert!(full.is_feasible(), "{text}");
        }
        // A deliberately broken certificate fails both ways.
        let l = lang("{00,000}");
        let mut c = certify_weak_dual(&Regex::parse_infer("(0+00)0").unwrap(), &l).unwrap();
        c.w.insert("0".into(), q(1));
        let closure = compute_closure(&l, 1000).unwrap();
        assert!(!check_weak_dual_cert(&c, &closure).unwrap().is_feasible());
        assert!(!check_weak_dual_sparse(&c, &|k: &Language| closure.contains(k)).is_feasible());
    }

    #[test]
    fn relaxed_certificates() {
        let c = certify_relaxed_dual(&Regex::word("0000"), 4, 0).unwrap();
        assert_eq!(c.w.len(), 1);
        assert_eq!(c.w["0000"], q(1));
        assert_eq!(c.objective(), q(4));
        for (n, k) in [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (8, 1)] {
            let r = build_ellul_bnk(n, k);
            let c = certify_relaxed_dual(&r, n, k).unwrap();
            assert_eq!(c.objective(), q(r.length() as i64), "({n},{k})");
            let rep = check_relaxed_dual_cert(&c).unwrap();
            assert!(rep.is_feasible(), "({n},{k}) {:?}", rep.violations);
        }
        assert!(certify_relaxed_dual(&Regex::parse_infer("(0+1)").unwrap(), 3, 1).is_err());
        // A part of a block on the left: falls back to spreading.
        let r = Regex::parse_infer("(001+010)0").unwrap();
        let c = certify_relaxed_dual(&r, 4, 1).unwrap();
        assert_eq!(c.objective(), q(7));
        assert_eq!(c.y[&(3, 1, 1, 0)], Rational::new(1, 2));
        assert_eq!(c.w["100"], Rational::new(2, 3));
    }

    #[test]
    fn spread_rule() {
        let c = certify_relaxed_dual_with(&build_ellul_bnk(2, 1), 2, 1, RelaxedRule::Spread).unwrap();
        assert_eq!(c.w["01"], q(1));
        assert_eq!(c.objective(), q(4));
        assert!(check_relaxed_dual_cert(&c).unwrap().is_feasible());
        let c = certify_relaxed_dual_with(&build_ellul_bnk(3, 1), 3, 1, RelaxedRule::Spread).unwrap();
        assert_eq!(c.objective(), q(8));
        assert_eq!(c.y[&(1, 0, 2, 1)], Rational::new(2, 3));
        let rep = check_relaxed_dual_cert(&c).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].what, "row x[100]");
    }

    #[test]
    fn sigma_primal_values() {
        let a = analytic_sigma_primal(3, &Alphabet::binary()).unwrap();
        assert_eq!(a.get_exact(&"x[0]".into()), Some(q(1)));
        assert_eq!(a.get_exact(&"x[01]".into()), Some(q(1)));
        assert_eq!(a.get_exact(&"x[010]".into()), Some(Rational::new(3, 4)));
        let unary = Alphabet::new(['a']).unwrap();
        let u = analytic_sigma_primal(4, &unary).unwrap();
        assert_eq!(u.get_exact(&"x[aaa]".into()), Some(q(3)));
        for n in 1..=3 {
            let l = sigma_n(&Alphabet::binary(), n);
            let closure = compute_closure(&l, 100_000).unwrap();
            let lp = build_weak_primal(&l, &closure).unwrap();
            let a = analytic_sigma_primal(n, &Alphabet::binary()).unwrap();
            let rep = check_feasible(&lp, &a, 0.0);
            assert!(rep.is_feasible());
            assert_eq!(rep.objective, Value::Exact(q(2 * n as i64)));
            assert!(verify_sigma_primal(n, 2).is_ok());
        }
        assert!(verify_sigma_primal(8, 2).is_ok());
        assert!(verify_sigma_primal(4, 3).is_ok());
    }

    #[test]
    fn binomial1_primal() {
        let a = analytic_binomial1_primal(1).unwrap();
        assert_eq!(a.get_f64(&"x[0]".into()), 1.0);
        assert_eq!(a.get_f64(&"x[1]".into()), 1.0);
        for n in 1..=12 {
            let lp = build_relaxed_binomial(n, 1).unwrap();
            let a = analytic_binomial1_primal(n).unwrap();
            let rep = check_feasible(&lp, &a, 1e-9);
            assert!(rep.is_feasible(), "n={n}");
            let nf = n as f64;
            assert!((rep.objective.to_f64() - nf * (1.0 + nf.ln())).abs() < 1e-9);
        }
        // The key inequality with |K1| = 3, n1 = 3, n2 = 5.
        let (k1, n1, n2) = (3.0f64, 3.0f64, 5.0f64);
        assert!(k1 * (1.0 + (n1 + n2).ln()) <= k1 * (1.0 + n1.ln()) + n2);
    }

    #[test]
    fn threshold_strong_assignment() {
        for n in 1..=3 {
            let l = threshold(n, 1);
            let closure = compute_closure(&l, 100_000).unwrap();
            let a = threshold_strong_on(&closure);
            let lp = build_strong_primal(&l, &closure).unwrap();
            let rep = check_feasible(&lp, &a, 1e-9);
            assert!(rep.is_feasible(), "n={n}: {:?}", rep.violations.first());
            let nf = n as f64;
            assert!((objective(&lp, &a).to_f64() - nf * (1.0 + nf.ln())).abs() < 1e-9);
        }
        let a = analytic_threshold_strong(2).unwrap();
        assert_eq!(a.get_f64(&VarName::indexed("X", lang("{0}"))), 1.0);
        assert!((a.get_f64(&VarName::indexed("X", lang("{01,10,11}"))) - 2.0 * (1.0 + 2f64.ln())).abs() < 1e-12);
    }

    fn table(alphas: &[f64]) -> AlphaTable {
        AlphaTable { alphas: alphas.to_vec(), kmax: alphas.len() + 1, nmax: 0, ratios: Vec::new(), note: "test".into() }
    }

    #[test]
    fn g_examples() {
        let t = table(&[3.0, 5.0, 7.0]);
        assert!((g_value("11", &t.alphas).unwrap() - 3.0 * 2f64.ln() / 2.0).abs() < 1e-15);
        assert!((g_value("010001", &t.alphas).unwrap() - 3.0 * 5f64.ln() / 5.0).abs() < 1e-15);
        assert!((g_value("010101", &t.alphas).unwrap() - 5.0 * 5f64.ln().powi(2) / 25.0).abs() < 1e-15);
        assert!((g_value("01010010100", &t.alphas).unwrap() - 7.0 * 8f64.ln().powi(3) / 512.0).abs() < 1e-15);
        assert_eq!(g_value("0000", &t.alphas), Some(4.0));
        assert!(analytic_g(5, 3, &table(&[1.0])).is_err());
    }

    #[test]
    fn counted_rows_match_enumeration() {
        let alphas = [0.75, 0.3];
        for n in 3..=9 {
            let idx = binomial_index(n, 3).unwrap();
            let a = analytic_g(n, 3, &table(&alphas)).unwrap();
            let lp = build_relaxed_binomial(n, 3).unwrap();
            for q in idx.concat.iter().filter(|q| q.0 + q.2 == n) {
                let row = lp.rows().iter().find(|r| r.label == VarName::quad(*q).to_string()).unwrap();
                let direct: f64 = row.coeffs.iter().map(|(j, c)| c.to_f64() * a.get_f64(&lp.vars()[*j].name)).sum();
                let counted = g_row_excess(*q, &alphas);
                assert!((direct - counted).abs() < 1e-9, "{q:?}: {direct} vs {counted}");
            }
            for l in 0..=3.min(n) {
                let direct: f64 = binomial_strings(n, l).iter().map(|s| g_value(s, &alphas).unwrap()).sum();
                assert!((direct - block_g_sum(n, l, &alphas)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn calibration_small() {
        let t = calibrate_alphas(3, 10).unwrap();
        assert_eq!(t.alphas.len(), 2);
        for a in &t.alphas {
            assert!(*a > 0.0);
            assert_eq!(a.log2().fract(), 0.0);
        }
        // Doubling α₁ must break feasibility somewhere up to n = 10.
        let mut doubled = t.alphas.clone();
        doubled[0] *= 2.0;
        assert!(first_g_violation(10, 2, &doubled, CALIBRATION_TOL).is_some());
        let back = AlphaTable::parse(&t.to_text()).unwrap();
        assert_eq!(back.alphas, t.alphas);
        assert_eq!((back.kmax, back.nmax), (3, 10));
        assert_eq!(back.ratios.len(), 3);
        for n in 2..=10 {
            for k in 2..=3.min(n) {
                let lp = build_relaxed_binomial(n, k).unwrap();
                assert!(check_feasible(&lp, &analytic_g(n, k, &t).unwrap(), 1e-9).is_feasible());
            }
        }
    }

    #[test]
    fn calibrated_constants_beyond_range() {
        let t = calibrate_alphas(3, 24).unwrap();
        let a1 = t.alpha(1).unwrap();
        for m in 1..=64 {
            for n in 1..=64 {
                assert!(first_complete_sign_holds(a1, m, n), "m={m} n={n}");
            }
        }
        let idx = binomial_index(32, 3).unwrap();
        for q in idx.concat.iter().filter(|q| (q.1, q.3) == (2, 1)) {
            assert!(g_row_excess(*q, &t.alphas) <= CALIBRATION_TOL, "{q:?}");
        }
        for k in 1..=3 {
            let (lo, hi) = t.ratio_interval(k).unwrap();
            assert!(lo > 0.0);
            for n in [8, 16, 32, 64] {
                let r = g_ratio(n, k, &t).unwrap();
                assert!(lo <= r && r <= hi);
            }
        }
    }

    #[test]
    fn convexity_corollary() {
        let f = |x: f64| x * x.ln().powi(2);
        for m in (1..=10_000).step_by(37).chain([1, 2, 10_000]) {
            for n in (1..=10_000).step_by(41).chain([1, 2, 10_000]) {
                let (mf, nf) = (m as f64, n as f64);
                assert!(f(mf + nf) - f(mf) - f(nf) <= 2.0 * (mf + nf) * (mf + nf).ln() + 1e-9);
            }
        }
    }

    #[test]
    fn super_multiplicativity() {
        for m1 in 0..=12 {
            for m2 in 0..=12 {
                for l1 in 0..=m1 {
                    for l2 in 0..=m2 {
                        assert!(binom(m1 + m2, l1 + l2) >= binom(m1, l1) * binom(m2, l2));
                    }
                }
            }
        }
    }

    #[test]
    fn binomial_block_sum_counts() {
        for m in 2..=10 {
            for l in 2..=m {
                let total: u128 = (l..=m).map(|p| (m - p + 1) as u128 * binom(p - 2, l - 2)).sum();
                assert_eq!(total, binom(m, l));
                assert_eq!(binomial(m, l).len() as u128, total);
            }
        }
    }
}
